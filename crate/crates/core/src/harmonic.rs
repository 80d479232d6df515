//! Sums over integers sorted by their number of distinct prime factors:
//! `H_ℓ(N)`, `A_ℓ(x)`, `Σ z^{ω(m)}/m` with its Euler product, and the
//! constant `G(z)` of the squarefree almost-prime count.

use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::primes::{PrimeTable, SumMode, SumValue};
use crate::rational::{format_rational, sum_reciprocals, to_f64, CompensatedSum};

pub const DEFAULT_OMEGA_CAP: u64 = 100_000_000;
/// Largest `N` for which exact rational sums are attempted.
pub const EXACT_SUM_LIMIT: u64 = 100_000;

/// `ω(n)` (packed two per byte) and a squarefree bitset for `1 ≤ n ≤ limit`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaSieve {
    limit: u64,
    omega: Vec<u8>,
    squarefree: Vec<u64>,
}

impl OmegaSieve {
    pub fn new(limit: u64) -> Result<Self> {
        Self::with_cap(limit, DEFAULT_OMEGA_CAP)
    }

    pub fn with_cap(limit: u64, cap: u64) -> Result<Self> {
        if limit > cap {
            return Err(Error::Resource(format!("omega sieve to {limit} exceeds the cap of {cap}")));
        }
        let n = limit as usize;
        let mut omega = vec![0u8; n / 2 + 1];
        let mut squarefree = vec![u64::MAX; n / 64 + 1];
        let get = |omega: &[u8], i: usize| (omega[i >> 1] >> ((i & 1) * 4)) & 0xf;
        for p in 2..=n {
            // still zero means no smaller prime divides p
            if get(&omega, p) != 0 {
                continue;
            }
            for m in (p..=n).step_by(p) {
                omega[m >> 1] += 1 << ((m & 1) * 4);
            }
            if let Some(sq) = p.checked_mul(p).filter(|&sq| sq <= n) {
                for m in (sq..=n).step_by(sq) {
                    squarefree[m >> 6] &= !(1u64 << (m & 63));
                }
            }
        }
        Ok(OmegaSieve { limit, omega, squarefree })
    }

    /// Rebuilds a sieve from [`OmegaSieve::to_bytes`] output.
    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let bad = || Error::Parse("malformed omega sieve cache".into());
        let limit = u64::from_le_bytes(bytes.get(..8).ok_or_else(bad)?.try_into().map_err(|_| bad())?);
        let n = limit as usize;
        let (olen, slen) = (n / 2 + 1, n / 64 + 1);
        if bytes.len() != 8 + olen + 8 * slen {
            return Err(bad());
        }
        let omega = bytes[8..8 + olen].to_vec();
        let squarefree = bytes[8 + olen..]
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("chunk of 8")))
            .collect();
        Ok(OmegaSieve { limit, omega, squarefree })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.omega.len() + 8 * self.squarefree.len());
        out.extend_from_slice(&self.limit.to_le_bytes());
        out.extend_from_slice(&self.omega);
        for w in &self.squarefree {
            out.extend_from_slice(&w.to_le_bytes());
        }
        out
    }

    pub fn limit(&self) -> u64 {
        self.limit
    }

    /// Number of distinct primes dividing `n`. `n` must be in `1..=limit`.
    #[inline]
    pub fn omega(&self, n: u64) -> u8 {
        let i = n as usize;
        (self.omega[i >> 1] >> ((i & 1) * 4)) & 0xf
    }

    #[inline]
    pub fn is_squarefree(&self, n: u64) -> bool {
        let i = n as usize;
        self.squarefree[i >> 6] >> (i & 63) & 1 == 1
    }

    fn check(&self, n: u64) -> Result<()> {
        if n == 0 {
            return Err(Error::invalid("range bound must be at least 1"));
        }
        if n > self.limit {
            return Err(Error::OutOfRange { value: n.to_string(), limit: self.limit.to_string() });
        }
        Ok(())
    }

    /// Squarefree `n ≤ bound` with `ω(n) = ℓ`, ascending.
    pub fn almost_primes(&self, bound: u64, ell: u32) -> Result<Vec<u64>> {
        self.check(bound)?;
        Ok((1..=bound).filter(|&n| self.omega(n) as u32 == ell && self.is_squarefree(n)).collect())
    }
}

/// What a [`HarmonicLedger`] measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Quantity {
    #[serde(rename = "H_l")]
    SquarefreeHarmonic,
    #[serde(rename = "A_l")]
    SquarefreeCount,
    #[serde(rename = "z_omega_sum")]
    ZOmegaSum,
    #[serde(rename = "euler_majorant")]
    EulerMajorant,
}

/// One evaluated sum with its range bound and parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicLedger {
    pub quantity: Quantity,
    pub bound: u64,
    pub parameter: f64,
    pub exact: Option<BigRational>,
    pub value: f64,
    pub terms: u64,
}

impl Serialize for HarmonicLedger {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("HarmonicLedger", 6)?;
        st.serialize_field("quantity", &self.quantity)?;
        st.serialize_field("bound", &self.bound)?;
        st.serialize_field("parameter", &self.parameter)?;
        st.serialize_field("exact", &self.exact.as_ref().map(format_rational))?;
        st.serialize_field("value", &self.value)?;
        st.serialize_field("terms", &self.terms)?;
        st.end()
    }
}

fn float_reciprocals(ns: &[u64]) -> f64 {
    ns.iter().map(|&n| 1.0 / n as f64).rev().collect::<CompensatedSum>().value()
}

/// `H_ℓ(N) = Σ 1/n` over squarefree `n ≤ N` with exactly `ℓ` prime factors.
/// Exact mode is limited to `N ≤ 10^5`.
pub fn h_ell(sieve: &OmegaSieve, n: u64, ell: u32, mode: SumMode) -> Result<HarmonicLedger> {
    if mode == SumMode::Exact && n > EXACT_SUM_LIMIT {
        return Err(Error::OutOfRange { value: n.to_string(), limit: EXACT_SUM_LIMIT.to_string() });
    }
    let terms = sieve.almost_primes(n, ell)?;
    let exact = (mode == SumMode::Exact).then(|| sum_reciprocals(&terms));
    let value = exact.as_ref().map_or_else(|| float_reciprocals(&terms), to_f64);
    Ok(HarmonicLedger {
        quantity: Quantity::SquarefreeHarmonic,
        bound: n,
        parameter: ell as f64,
        exact,
        value,
        terms: terms.len() as u64,
    })
}

/// Builds a sieve just for this call.
pub fn h_ell_upto(n: u64, ell: u32, mode: SumMode) -> Result<HarmonicLedger> {
    h_ell(&OmegaSieve::new(n)?, n, ell, mode)
}

/// `A_ℓ(x)`: the number of squarefree `n ≤ x` with `ω(n) = ℓ`.
pub fn a_ell(sieve: &OmegaSieve, x: u64, ell: u32) -> Result<u64> {
    sieve.check(x)?;
    Ok((1..=x).filter(|&n| sieve.omega(n) as u32 == ell && sieve.is_squarefree(n)).count() as u64)
}

/// `H_ℓ(N)` and `A_ℓ(N)` for every `ℓ` at each of the given bounds, in a
/// single ascending pass. Index `[i][ℓ]` refers to `bounds[i]`.
pub fn squarefree_tables(sieve: &OmegaSieve, bounds: &[u64]) -> Result<(Vec<Vec<f64>>, Vec<Vec<u64>>)> {
    let mut sorted = bounds.to_vec();
    sorted.sort_unstable();
    if let Some(&b) = sorted.last() {
        sieve.check(b)?;
    }
    if sorted.first() == Some(&0) {
        return Err(Error::invalid("range bound must be at least 1"));
    }
    let mut sums = vec![CompensatedSum::new(); 16];
    let mut counts = vec![0u64; 16];
    let mut at = std::collections::BTreeMap::new();
    let mut next = 0;
    for n in 1..=sorted.last().copied().unwrap_or(0) {
        if sieve.is_squarefree(n) {
            let w = sieve.omega(n) as usize;
            sums[w].add(1.0 / n as f64);
            counts[w] += 1;
        }
        while next < sorted.len() && sorted[next] == n {
            at.insert(n, (sums.iter().map(CompensatedSum::value).collect::<Vec<_>>(), counts.clone()));
            next += 1;
        }
    }
    Ok(bounds.iter().map(|b| at[b].clone()).unzip())
}

/// `Σ_{m ≤ X} z^{ω(m)}/m` over all `m`, squarefree or not.
pub fn z_omega_sum(sieve: &OmegaSieve, x: u64, z: f64) -> Result<HarmonicLedger> {
    sieve.check(x)?;
    if !(z > 0.0) {
        return Err(Error::Domain(format!("z must be positive, got {z}")));
    }
    let powers: Vec<f64> = (0..16).map(|j| z.powi(j)).collect();
    let value = (1..=x)
        .map(|m| powers[sieve.omega(m) as usize] / m as f64)
        .rev()
        .collect::<CompensatedSum>()
        .value();
    Ok(HarmonicLedger { quantity: Quantity::ZOmegaSum, bound: x, parameter: z, exact: None, value, terms: x })
}

/// `Π_{p ≤ X} (1 + z/(p − 1))`, evaluated as the exponential of a
/// compensated log sum.
pub fn euler_majorant(table: &PrimeTable, x: u64, z: f64) -> Result<HarmonicLedger> {
    if !(z > 0.0) {
        return Err(Error::Domain(format!("z must be positive, got {z}")));
    }
    let primes = table.primes_in_closed(0.0, x as f64)?;
    let log = primes.iter().map(|&p| (z / (p - 1) as f64).ln_1p()).collect::<CompensatedSum>().value();
    Ok(HarmonicLedger {
        quantity: Quantity::EulerMajorant,
        bound: x,
        parameter: z,
        exact: None,
        value: log.exp(),
        terms: primes.len() as u64,
    })
}

/// Truncated Euler product for `G(z)` with its error bound.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GValue {
    pub z: f64,
    pub cutoff: u64,
    pub value: f64,
    /// Bound on `|log G − log value|` from the primes above the cutoff.
    pub log_tail_bound: f64,
    /// Bound on `|G − value|`; the truncated product never underestimates.
    pub tail_bound: f64,
}

/// `G(z) = Γ(1+z)^{-1} Π_p (1 + z/p)(1 − 1/p)^z` over primes up to the
/// table limit, for `0 ≤ z < 2`.
///
/// Each log factor `f(p) = log(1 + z/p) + z log(1 − 1/p)` lies in
/// `[−z(z+1)/p², 0]`, and `Σ_{n > C} 1/n² ≤ 1/C`, so the omitted primes
/// change `log G` by at most `z(z+1)/C`, always downward.
pub fn g_constant_with(table: &PrimeTable, z: f64) -> Result<GValue> {
    if !(0.0..2.0).contains(&z) {
        return Err(Error::Domain(format!("G(z) needs 0 <= z < 2, got {z}")));
    }
    let cutoff = table.limit();
    if z == 0.0 {
        return Ok(GValue { z, cutoff, value: 1.0, log_tail_bound: 0.0, tail_bound: 0.0 });
    }
    let mut acc = CompensatedSum::new();
    acc.add(-statrs::function::gamma::ln_gamma(1.0 + z));
    for &p in table.primes() {
        let p = p as f64;
        acc.add((z / p).ln_1p() + z * (-1.0 / p).ln_1p());
    }
    let value = acc.value().exp();
    let log_tail_bound = if cutoff == 0 { f64::INFINITY } else { z * (z + 1.0) / cutoff as f64 };
    Ok(GValue { z, cutoff, value, log_tail_bound, tail_bound: value * -(-log_tail_bound).exp_m1() })
}

pub fn g_constant(z: f64, prime_cutoff: u64) -> Result<GValue> {
    if !(0.0..2.0).contains(&z) {
        return Err(Error::Domain(format!("G(z) needs 0 <= z < 2, got {z}")));
    }
    g_constant_with(&PrimeTable::new(prime_cutoff)?, z)
}

/// `G((ℓ−1)/L) · (x/log x) · L^{ℓ−1}/(ℓ−1)!` with `L = log log x`.
pub fn sathe_selberg_main_term(x: u64, ell: u32, table: &PrimeTable) -> Result<f64> {
    if ell == 0 {
        return Err(Error::Domain("the main term needs ell >= 1".into()));
    }
    if x < 3 {
        return Err(Error::Domain(format!("x must be at least 3, got {x}")));
    }
    let xf = x as f64;
    let l = xf.ln().ln();
    let arg = (ell - 1) as f64 / l;
    if !(0.0..2.0).contains(&arg) {
        return Err(Error::Domain(format!("argument {arg} of G lies outside [0, 2)")));
    }
    let g = g_constant_with(table, arg)?.value;
    let m = (ell - 1) as u64;
    Ok(g * xf / xf.ln() * (l.powi(m as i32) / statrs::function::factorial::factorial(m)))
}

/// One row of the `H_ℓ` growth table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrendRow {
    #[serde(rename = "N")]
    pub n: u64,
    pub ell: u32,
    pub exact: Option<String>,
    pub value: f64,
    /// `(log log N)^ℓ / ℓ!`
    pub scale: f64,
    pub ratio: f64,
}

/// `H_ℓ(N)` against `(log log N)^ℓ/ℓ!` for every pair. Exact values are
/// included where `N ≤ 10^5`.
pub fn h_ell_trend(sieve: &OmegaSieve, bounds: &[u64], ells: &[u32]) -> Result<Vec<TrendRow>> {
    let (sums, _) = squarefree_tables(sieve, bounds)?;
    let mut rows = Vec::new();
    for (i, &n) in bounds.iter().enumerate() {
        for &ell in ells {
            let exact = if n <= EXACT_SUM_LIMIT {
                h_ell(sieve, n, ell, SumMode::Exact)?.exact.map(|q| format_rational(&q))
            } else {
                None
            };
            let value = sums[i].get(ell as usize).copied().unwrap_or(0.0);
            let scale = (n as f64).ln().ln().powi(ell as i32) / statrs::function::factorial::factorial(ell as u64);
            rows.push(TrendRow { n, ell, exact, value, scale, ratio: value / scale });
        }
    }
    Ok(rows)
}

pub fn trend_csv(rows: &[TrendRow]) -> String {
    let mut out = String::from("N,ell,exact,H_float,scale,ratio\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{:.15e},{:.15e},{:.15e}\n",
            r.n,
            r.ell,
            r.exact.as_deref().unwrap_or(""),
            r.value,
            r.scale,
            r.ratio
        ));
    }
    out
}

/// `Σ 1/p` for primes `p ≤ N` via the sieve, as a cross-check on
/// [`PrimeTable::harmonic_sum`].
pub fn prime_reciprocal_sum(sieve: &OmegaSieve, n: u64, mode: SumMode) -> Result<SumValue> {
    let l = h_ell(sieve, n, 1, mode)?;
    Ok(match l.exact {
        Some(q) => SumValue::Exact(q),
        None => SumValue::Float(l.value),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{One, Zero};

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn omega_by_division(mut n: u64) -> (u8, bool) {
        let mut w = 0;
        let mut sf = true;
        let mut p = 2;
        while p * p <= n {
            if n % p == 0 {
                w += 1;
                n /= p;
                if n % p == 0 {
                    sf = false;
                }
                while n % p == 0 {
                    n /= p;
                }
            }
            p += 1;
        }
        if n > 1 {
            w += 1;
        }
        (w, sf)
    }

    #[test]
    fn sieve_matches_trial_division() {
        let s = OmegaSieve::new(20_000).unwrap();
        for n in 1..=20_000 {
            assert_eq!((s.omega(n), s.is_squarefree(n)), omega_by_division(n), "n={n}");
        }
        assert_eq!((s.omega(12), s.is_squarefree(12)), (2, false));
        assert_eq!((s.omega(1), s.is_squarefree(1)), (0, true));
        assert_eq!((s.omega(30), s.is_squarefree(30)), (3, true));
        assert!(OmegaSieve::with_cap(100, 50).is_err());
    }

    #[test]
    fn sieve_bytes_roundtrip() {
        let s = OmegaSieve::new(1234).unwrap();
        assert_eq!(OmegaSieve::from_bytes(&s.to_bytes()).unwrap(), s);
        assert!(OmegaSieve::from_bytes(&s.to_bytes()[..20]).is_err());
    }

    #[test]
    fn h_ell_examples() {
        let s = OmegaSieve::new(1000).unwrap();
        for n in [1, 2, 50, 1000] {
            assert_eq!(h_ell(&s, n, 0, SumMode::Exact).unwrap().exact, Some(q(1, 1)));
        }
        assert_eq!(h_ell(&s, 10, 1, SumMode::Exact).unwrap().exact, Some(q(247, 210)));
        let h2 = h_ell(&s, 10, 2, SumMode::Exact).unwrap();
        assert_eq!((h2.exact, h2.terms), (Some(q(4, 15)), 2));
        assert_eq!(a_ell(&s, 10, 1).unwrap(), 4);
        assert_eq!(a_ell(&s, 10, 2).unwrap(), 2);
        assert_eq!(a_ell(&s, 777, 0).unwrap(), 1);
        assert!(h_ell(&s, 1001, 1, SumMode::Float).is_err());
        assert!(h_ell(&s, 0, 1, SumMode::Float).is_err());
        assert!(h_ell_upto(200_000, 1, SumMode::Exact).is_err());
    }

    #[test]
    fn exact_and_float_agree() {
        let s = OmegaSieve::new(100_000).unwrap();
        for ell in 0..=6 {
            let e = h_ell(&s, 100_000, ell, SumMode::Exact).unwrap();
            let f = h_ell(&s, 100_000, ell, SumMode::Float).unwrap();
            assert_eq!(e.terms, f.terms);
            assert!((e.value - f.value).abs() <= 1e-10 * e.value.max(1e-300));
        }
    }

    #[test]
    fn partition_identity_and_increments() {
        let s = OmegaSieve::new(3000).unwrap();
        let n = 3000;
        let total = (0..=6).fold(BigRational::zero(), |a, ell| a + h_ell(&s, n, ell, SumMode::Exact).unwrap().exact.unwrap());
        let sf: Vec<u64> = (1..=n).filter(|&m| s.is_squarefree(m)).collect();
        assert_eq!(total, sum_reciprocals(&sf));
        for m in 2..=300u64 {
            for ell in 0..=3 {
                let dh = h_ell(&s, m, ell, SumMode::Exact).unwrap().exact.unwrap()
                    - h_ell(&s, m - 1, ell, SumMode::Exact).unwrap().exact.unwrap();
                let da = a_ell(&s, m, ell).unwrap() - a_ell(&s, m - 1, ell).unwrap();
                assert_eq!(dh == q(1, m as i64), da == 1);
                assert_eq!(dh.is_zero(), da == 0);
            }
        }
    }

    #[test]
    fn tables_match_single_sums() {
        let s = OmegaSieve::new(50_000).unwrap();
        let (sums, counts) = squarefree_tables(&s, &[50_000, 10, 1234]).unwrap();
        for (i, &b) in [50_000u64, 10, 1234].iter().enumerate() {
            for ell in 0..=5u32 {
                let l = h_ell(&s, b, ell, SumMode::Float).unwrap();
                assert!((sums[i][ell as usize] - l.value).abs() < 1e-13);
                assert_eq!(counts[i][ell as usize], a_ell(&s, b, ell).unwrap());
            }
        }
    }

    #[test]
    fn z_omega_examples() {
        let s = OmegaSieve::new(10).unwrap();
        assert_eq!(z_omega_sum(&s, 1, 0.7).unwrap().value, 1.0);
        assert_eq!(z_omega_sum(&s, 2, 2.0).unwrap().value, 2.0);
        assert!((z_omega_sum(&s, 10, 1.0).unwrap().value - 7381.0 / 2520.0).abs() < 1e-14);
        assert!(z_omega_sum(&s, 10, 0.0).is_err());
    }

    #[test]
    fn z_sum_below_majorant() {
        let s = OmegaSieve::new(20_000).unwrap();
        let t = PrimeTable::new(20_000).unwrap();
        for x in [1, 2, 10, 100, 20_000] {
            for z in [0.25, 0.5, 1.0, 1.5, 1.9, 3.0] {
                assert!(z_omega_sum(&s, x, z).unwrap().value <= euler_majorant(&t, x, z).unwrap().value);
            }
        }
        assert_eq!(euler_majorant(&t, 2, 1.0).unwrap().value, 2.0);
    }

    #[test]
    fn g_values() {
        let g0 = g_constant(0.0, 100).unwrap();
        assert_eq!((g0.value, g0.tail_bound), (1.0, 0.0));
        let t = PrimeTable::new(1_000_000).unwrap();
        let g1 = g_constant_with(&t, 1.0).unwrap();
        let target = 6.0 / std::f64::consts::PI.powi(2);
        assert!((g1.value - target).abs() < 1e-4);
        assert!(g1.value >= target);
        assert!(g1.value - target <= g1.tail_bound);
        for i in 0..8 {
            assert!(g_constant_with(&t, i as f64 * 0.25).unwrap().value > 0.0);
        }
        assert!(g_constant(2.0, 100).is_err());
        assert!(g_constant(-0.1, 100).is_err());
        assert!(g_constant_with(&t, 1.0).unwrap().value.is_finite());
        let _ = BigRational::one();
    }

    #[test]
    fn main_term() {
        let t = PrimeTable::new(100_000).unwrap();
        let m = sathe_selberg_main_term(1_000_000, 1, &t).unwrap();
        assert!((m - 1e6 / 1e6f64.ln()).abs() < 1e-6);
        let ratio = 78_498.0 / m;
        assert!((0.9..=1.2).contains(&ratio));
        // (ℓ − 1) = 2 log log x sits on the boundary
        let x = 1_000_000u64;
        let l = (x as f64).ln().ln();
        let ell = (2.0 * l).ceil() as u32 + 1;
        assert!(sathe_selberg_main_term(x, ell, &t).is_err());
        assert!(sathe_selberg_main_term(x, 0, &t).is_err());
    }

    #[test]
    fn trend_rows() {
        let s = OmegaSieve::new(100_000).unwrap();
        let rows = h_ell_trend(&s, &[10_000, 100_000], &[1, 2]).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.exact.is_some() && r.ratio > 0.0));
        let csv = trend_csv(&rows);
        assert_eq!(csv.lines().count(), 5);
    }
}
