//! Prime sieving and the prime harmonic / logarithmic sums.
//!
//! Ranges follow the half-open convention `(lo, hi]` everywhere.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{compensated_sum, sum_reciprocals_coprime, to_f64};

/// Largest sieve limit accepted unless the caller raises it.
pub const DEFAULT_SIEVE_BUDGET: u64 = 100_000_000;

/// Accumulation mode for harmonic sums.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SumMode {
    Exact,
    Float,
}

/// Result of a harmonic sum in either mode.
#[derive(Debug, Clone, PartialEq)]
pub enum SumValue {
    Exact(BigRational),
    Float(f64),
}

impl SumValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            SumValue::Exact(r) => to_f64(r),
            SumValue::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            SumValue::Exact(r) => Some(r),
            SumValue::Float(_) => None,
        }
    }
}

/// All primes up to `limit`, ascending. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeTable {
    limit: u64,
    primes: Vec<u64>,
}

/// Sieve of Eratosthenes over odd numbers, one bit per candidate.
fn odd_sieve(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    // bit i stands for 2i+1; set bit = composite
    let slots = (limit as usize - 1) / 2 + 1;
    let mut composite = vec![0u64; slots.div_ceil(64)];
    let mut i = 1usize;
    while (2 * i + 1) * (2 * i + 1) <= limit as usize {
        if composite[i / 64] >> (i % 64) & 1 == 0 {
            let p = 2 * i + 1;
            let mut j = p * p / 2;
            while j < slots {
                composite[j / 64] |= 1 << (j % 64);
                j += p;
            }
        }
        i += 1;
    }
    let mut primes = Vec::with_capacity(estimate_prime_count(limit));
    primes.push(2);
    for i in 1..slots {
        if composite[i / 64] >> (i % 64) & 1 == 0 {
            primes.push(2 * i as u64 + 1);
        }
    }
    primes
}

fn estimate_prime_count(limit: u64) -> usize {
    if limit < 17 {
        return 8;
    }
    let x = limit as f64;
    (1.26 * x / x.ln()) as usize
}

impl PrimeTable {
    /// Sieves all primes `≤ limit` under the default budget.
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_budget(limit, DEFAULT_SIEVE_BUDGET)
    }

    pub fn with_budget(limit: u64, budget: u64) -> Result<Self> {
        if limit > budget {
            return Err(Error::Resource(format!(
                "sieve limit {limit} exceeds the configured budget {budget}"
            )));
        }
        Ok(PrimeTable { limit, primes: odd_sieve(limit) })
    }

    /// Rebuilds a table from a previously sieved prime list, checking it.
    pub fn from_parts(limit: u64, primes: Vec<u64>) -> Result<Self> {
        let fresh = odd_sieve(limit);
        if fresh != primes {
            return Err(Error::invalid(format!("prime list does not match the primes up to {limit}")));
        }
        Ok(PrimeTable { limit, primes })
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn len(&self) -> usize {
        self.primes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.primes.is_empty()
    }

    /// Ordinal of `p` in the table, used as its bitmask position.
    pub fn index_of(&self, p: u64) -> Option<usize> {
        self.primes.binary_search(&p).ok()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.index_of(n).is_some()
    }

    fn check_hi(&self, hi: f64) -> Result<()> {
        if hi > self.limit as f64 {
            return Err(Error::OutOfRange { value: hi.to_string(), limit: self.limit.to_string() });
        }
        Ok(())
    }

    /// Primes in `(lo, hi]`.
    pub fn primes_in(&self, lo: f64, hi: f64) -> Result<&[u64]> {
        self.check_hi(hi)?;
        if !(lo <= hi) {
            return Err(Error::invalid(format!("empty or reversed interval ({lo}, {hi}]")));
        }
        let start = self.primes.partition_point(|&p| p as f64 <= lo);
        let end = self.primes.partition_point(|&p| p as f64 <= hi);
        Ok(&self.primes[start..end.max(start)])
    }

    /// Primes in `[lo, hi]` (closed at the left end).
    pub fn primes_in_closed(&self, lo: f64, hi: f64) -> Result<&[u64]> {
        self.check_hi(hi)?;
        if !(lo <= hi) {
            return Err(Error::invalid(format!("empty or reversed interval [{lo}, {hi}]")));
        }
        let start = self.primes.partition_point(|&p| (p as f64) < lo);
        let end = self.primes.partition_point(|&p| p as f64 <= hi);
        Ok(&self.primes[start..end.max(start)])
    }

    /// `Σ_{lo < p ≤ hi} 1/p`.
    pub fn harmonic_sum(&self, lo: f64, hi: f64, mode: SumMode) -> Result<SumValue> {
        let ps = self.primes_in(lo, hi)?;
        Ok(match mode {
            SumMode::Exact => SumValue::Exact(sum_reciprocals_coprime(ps)),
            SumMode::Float => SumValue::Float(compensated_sum(ps.iter().map(|&p| 1.0 / p as f64))),
        })
    }

    /// `Σ_{p ≤ hi} (log p)/p`.
    pub fn log_sum(&self, hi: f64) -> Result<f64> {
        let ps = self.primes_in(0.0, hi)?;
        Ok(compensated_sum(ps.iter().map(|&p| (p as f64).ln() / p as f64)))
    }
}

pub fn sieve_primes(limit: u64) -> Result<PrimeTable> {
    PrimeTable::new(limit)
}

pub fn prime_harmonic_sum(table: &PrimeTable, lo: f64, hi: f64, mode: SumMode) -> Result<SumValue> {
    table.harmonic_sum(lo, hi, mode)
}

pub fn prime_log_sum(table: &PrimeTable, hi: f64) -> Result<f64> {
    table.log_sum(hi)
}

/// Deterministic trial-division primality test, independent of the sieve.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn small_tables() {
        assert_eq!(PrimeTable::new(10).unwrap().primes(), &[2, 3, 5, 7]);
        assert!(PrimeTable::new(1).unwrap().is_empty());
        assert!(PrimeTable::new(0).unwrap().is_empty());
        assert_eq!(PrimeTable::new(2).unwrap().primes(), &[2]);
        let t = PrimeTable::new(100).unwrap();
        assert_eq!(t.len(), 25);
        assert_eq!(*t.primes().last().unwrap(), 97);
    }

    #[test]
    fn sieve_matches_trial_division() {
        let t = PrimeTable::new(20_000).unwrap();
        let oracle: Vec<u64> = (0..=20_000).filter(|&n| is_prime(n)).collect();
        assert_eq!(t.primes(), oracle.as_slice());
        for (i, &p) in t.primes().iter().enumerate() {
            assert_eq!(t.index_of(p), Some(i));
        }
        assert_eq!(t.index_of(4), None);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(PrimeTable::with_budget(1000, 999), Err(Error::Resource(_))));
    }

    #[test]
    fn harmonic_examples() {
        let t = PrimeTable::new(10).unwrap();
        let s = t.harmonic_sum(1.0, 10.0, SumMode::Exact).unwrap();
        assert_eq!(s.exact().unwrap(), &q(247, 210));
        let empty = t.harmonic_sum(7.0, 7.0, SumMode::Exact).unwrap();
        assert!(empty.exact().unwrap().is_zero());
        assert!(matches!(t.harmonic_sum(1.0, 11.0, SumMode::Float), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn mertens_first_theorem() {
        let t = PrimeTable::new(1_000_000).unwrap();
        let s = t.harmonic_sum(1.0, 1e6, SumMode::Float).unwrap().to_f64();
        let expected = (1e6f64).ln().ln() + 0.261_497_212_847_642_8;
        assert!((s - expected).abs() < 0.01, "{s} vs {expected}");
    }

    #[test]
    fn log_sum_examples() {
        let t = PrimeTable::new(100_000).unwrap();
        assert!((t.log_sum(2.0).unwrap() - 2f64.ln() / 2.0).abs() < 1e-15);
        assert_eq!(t.log_sum(1.0).unwrap(), 0.0);
        let s = t.log_sum(1e5).unwrap();
        assert!((s - 1e5f64.ln()).abs() <= 3.0);
    }

    #[test]
    fn exact_and_float_agree() {
        let t = PrimeTable::new(100_000).unwrap();
        let e = t.harmonic_sum(0.0, 1e5, SumMode::Exact).unwrap().to_f64();
        let f = t.harmonic_sum(0.0, 1e5, SumMode::Float).unwrap().to_f64();
        assert!(((e - f) / e).abs() < 1e-12);
    }

    #[test]
    fn closed_interval_includes_left_end() {
        let t = PrimeTable::new(30).unwrap();
        assert_eq!(t.primes_in(5.0, 13.0).unwrap(), &[7, 11, 13]);
        assert_eq!(t.primes_in_closed(5.0, 13.0).unwrap(), &[5, 7, 11, 13]);
    }
}
