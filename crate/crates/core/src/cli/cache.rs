//! On-disk cache of omega sieves, keyed by limit.

use std::path::PathBuf;

use crate::error::Result;
use crate::harmonic::OmegaSieve;

/// Environment variable naming the cache directory. Unset means no cache.
pub const CACHE_ENV: &str = "LCMSF_CACHE_DIR";

fn cache_dir() -> Option<PathBuf> {
    std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

pub fn omega_sieve(limit: u64) -> Result<OmegaSieve> {
    let Some(dir) = cache_dir() else {
        return OmegaSieve::new(limit);
    };
    let path = dir.join(format!("omega-{limit}.bin"));
    if let Ok(bytes) = std::fs::read(&path) {
        if let Ok(s) = OmegaSieve::from_bytes(&bytes) {
            if s.limit() == limit {
                return Ok(s);
            }
        }
    }
    let s = OmegaSieve::new(limit)?;
    std::fs::create_dir_all(&dir)?;
    // write then rename so concurrent readers never see a partial file
    let tmp = dir.join(format!("omega-{limit}.bin.{}", std::process::id()));
    std::fs::write(&tmp, s.to_bytes())?;
    std::fs::rename(&tmp, &path)?;
    Ok(s)
}
