use super::{factorize, LcmInstance};
use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::setfam::SetFamily;

/// Distinct primes dividing `m`, ascending.
pub fn prime_divisors(m: u64) -> Result<Vec<u64>> {
    let table = PrimeTable::new(((m as f64).sqrt() as u64) + 2)?;
    Ok(factorize(m, &table)?.into_iter().map(|(p, _)| p).collect())
}

/// The family of `ℓ`-sets `S` of primes of `m` with `m = a·Π_{p∈S} p` for
/// some `a` in the instance. The ground set is the primes of `m` (labels
/// carry their values), so `r_ℓ(m)` is the family's size.
pub fn representation_family(m: u64, instance: &LcmInstance, ell: usize) -> Result<SetFamily> {
    if m == 0 {
        return Err(Error::invalid("m must be positive"));
    }
    let primes = prime_divisors(m)?;
    let w = primes.len();
    let mut members = Vec::new();
    if ell <= w {
        for mask in 0u64..(1u64 << w) {
            if mask.count_ones() as usize != ell {
                continue;
            }
            let d: u64 = (0..w).filter(|&i| mask >> i & 1 == 1).map(|i| primes[i]).product();
            if instance.contains(m / d) {
                members.push(mask);
            }
        }
    }
    SetFamily::new(w, members)?.with_labels(primes.iter().map(|p| p.to_string()).collect())
}

pub fn representation_count(m: u64, instance: &LcmInstance, ell: usize) -> Result<usize> {
    Ok(representation_family(m, instance, ell)?.len())
}

/// Prime supports of a squarefree instance as a family over its support
/// primes. For squarefree integers lcm corresponds to union of supports.
pub fn support_family(instance: &LcmInstance) -> Result<SetFamily> {
    if let Some(i) = instance.factorizations().iter().position(|f| f.iter().any(|&(_, e)| e > 1)) {
        return Err(Error::invalid(format!("element {} is not squarefree", instance.elements()[i])));
    }
    let masks = instance.support_masks()?;
    SetFamily::new(instance.support_primes().len(), masks)?
        .with_labels(instance.support_primes().iter().map(|p| p.to_string()).collect())
}
