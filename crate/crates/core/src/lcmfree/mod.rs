//! LCM-k-tuple detection, the exact `f_k(N)` solver, and the prime-support
//! encodings that connect integer sets to set families.

mod detect;
mod represent;
mod solver;

pub use detect::{find_lcm_k_tuple, find_lcm_k_tuple_naive, is_lcm_k_free, lcm};
pub use represent::{prime_divisors, representation_count, representation_family, support_family};
pub use solver::{exact_fk, exact_fk_with, FkConfig, FkResult, DEFAULT_FK_CEILING};

use crate::error::{Error, Result};
use crate::primes::PrimeTable;

/// A finite set of positive integers together with their factorizations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LcmInstance {
    elements: Vec<u64>,
    factorizations: Vec<Vec<(u64, u32)>>,
    /// Distinct primes dividing some element, ascending.
    support_primes: Vec<u64>,
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r.saturating_mul(r) > n {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= n {
        r += 1;
    }
    r
}

/// Trial division against `table`. Fails if the table is too small to
/// certify a leftover cofactor as prime.
pub fn factorize(n: u64, table: &PrimeTable) -> Result<Vec<(u64, u32)>> {
    if n == 0 {
        return Err(Error::invalid("cannot factor 0"));
    }
    let mut rest = n;
    let mut out = Vec::new();
    for &p in table.primes() {
        if p.saturating_mul(p) > rest {
            break;
        }
        if rest % p == 0 {
            let mut e = 0;
            while rest % p == 0 {
                rest /= p;
                e += 1;
            }
            out.push((p, e));
        }
    }
    if rest > 1 {
        let lim = table.limit();
        if (rest as u128) > (lim as u128 + 1) * (lim as u128 + 1) && isqrt(rest) > lim {
            return Err(Error::Resource(format!(
                "prime table up to {lim} cannot factor {n} (cofactor {rest})"
            )));
        }
        out.push((rest, 1));
        out.sort_unstable();
    }
    Ok(out)
}

impl LcmInstance {
    /// Builds an instance, sieving just enough primes to factor it.
    pub fn new(elements: impl IntoIterator<Item = u64>) -> Result<Self> {
        let elements: Vec<u64> = elements.into_iter().collect();
        let max = elements.iter().copied().max().unwrap_or(1);
        let table = PrimeTable::new(isqrt(max) + 1)?;
        Self::with_table(elements, &table)
    }

    pub fn with_table(elements: impl IntoIterator<Item = u64>, table: &PrimeTable) -> Result<Self> {
        let mut elements: Vec<u64> = elements.into_iter().collect();
        if elements.contains(&0) {
            return Err(Error::invalid("instance elements must be positive"));
        }
        elements.sort_unstable();
        if let Some(w) = elements.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate element {}", w[0])));
        }
        let factorizations = elements.iter().map(|&a| factorize(a, table)).collect::<Result<Vec<_>>>()?;
        let mut support_primes: Vec<u64> = factorizations.iter().flatten().map(|&(p, _)| p).collect();
        support_primes.sort_unstable();
        support_primes.dedup();
        Ok(LcmInstance { elements, factorizations, support_primes })
    }

    /// Builds an instance from elements whose factorizations are already
    /// known. Each factorization must multiply back to its element.
    pub fn with_factorizations(items: Vec<(u64, Vec<(u64, u32)>)>) -> Result<Self> {
        let mut items = items;
        items.sort_unstable_by_key(|(a, _)| *a);
        if let Some(w) = items.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::invalid(format!("duplicate element {}", w[0].0)));
        }
        for (a, f) in &mut items {
            f.sort_unstable();
            let prod = f
                .iter()
                .try_fold(1u64, |acc, &(p, e)| p.checked_pow(e).and_then(|pe| acc.checked_mul(pe)));
            if *a == 0 || prod != Some(*a) {
                return Err(Error::invalid(format!("factorization does not match element {a}")));
            }
        }
        let (elements, factorizations): (Vec<u64>, Vec<_>) = items.into_iter().unzip();
        let mut support_primes: Vec<u64> = factorizations.iter().flatten().map(|&(p, _)| p).collect();
        support_primes.sort_unstable();
        support_primes.dedup();
        Ok(LcmInstance { elements, factorizations, support_primes })
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, a: u64) -> bool {
        self.elements.binary_search(&a).is_ok()
    }

    pub fn factorizations(&self) -> &[Vec<(u64, u32)>] {
        &self.factorizations
    }

    pub fn support_primes(&self) -> &[u64] {
        &self.support_primes
    }

    /// Bitmask of each element's distinct primes, indexed by position in
    /// [`LcmInstance::support_primes`].
    pub fn support_masks(&self) -> Result<Vec<u64>> {
        if self.support_primes.len() > 64 {
            return Err(Error::GroundSetOverflow(self.support_primes.len()));
        }
        Ok(self
            .factorizations
            .iter()
            .map(|f| {
                f.iter().fold(0u64, |m, &(p, _)| {
                    m | 1 << self.support_primes.binary_search(&p).expect("support prime")
                })
            })
            .collect())
    }

    pub fn is_squarefree(&self) -> bool {
        self.factorizations.iter().all(|f| f.iter().all(|&(_, e)| e == 1))
    }
}

/// Parses newline- or whitespace-separated integers, or a JSON list.
pub fn parse_instance(text: &str) -> Result<Vec<u64>> {
    let t = text.trim();
    if t.starts_with('[') {
        return Ok(serde_json::from_str::<Vec<u64>>(t)?);
    }
    t.split_whitespace()
        .enumerate()
        .map(|(i, tok)| tok.parse::<u64>().map_err(|e| Error::Parse(format!("entry {}: {tok:?}: {e}", i + 1))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorization_products() {
        let t = PrimeTable::new(100).unwrap();
        for n in 1..=10_000u64 {
            let f = factorize(n, &t).unwrap();
            assert_eq!(f.iter().map(|&(p, e)| p.pow(e)).product::<u64>(), n);
            assert!(f.iter().all(|&(p, _)| crate::primes::is_prime(p)));
        }
        assert!(factorize(101 * 103, &PrimeTable::new(10).unwrap()).is_err());
        assert_eq!(factorize(97, &PrimeTable::new(10).unwrap()).unwrap(), vec![(97, 1)]);
    }

    #[test]
    fn instance_fields() {
        let inst = LcmInstance::new([15, 6, 10]).unwrap();
        assert_eq!(inst.elements(), &[6, 10, 15]);
        assert_eq!(inst.support_primes(), &[2, 3, 5]);
        assert_eq!(inst.support_masks().unwrap(), vec![0b011, 0b101, 0b110]);
        assert!(inst.is_squarefree());
        assert!(LcmInstance::new([4, 4]).is_err());
        assert!(LcmInstance::new([0]).is_err());
        assert!(!LcmInstance::new([12]).unwrap().is_squarefree());
    }

    #[test]
    fn parsing() {
        assert_eq!(parse_instance("6\n10\n15\n").unwrap(), vec![6, 10, 15]);
        assert_eq!(parse_instance("[6, 10, 15]").unwrap(), vec![6, 10, 15]);
        assert!(parse_instance("6\nx").unwrap_err().to_string().contains("entry 2"));
    }
}
