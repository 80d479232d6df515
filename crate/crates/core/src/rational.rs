//! Exact and compensated accumulation helpers shared by the harmonic sums.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Compensated sum of an iterator of floats.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    iter.into_iter().collect::<CompensatedSum>().value()
}

/// Exact `Σ 1/d` over the given positive denominators.
///
/// Uses a balanced product tree and a single reduction at the root, which
/// keeps the cost close to a few big multiplications instead of one gcd per
/// term.
pub fn sum_reciprocals(denominators: &[u64]) -> BigRational {
    if denominators.is_empty() {
        return BigRational::zero();
    }
    let (num, den) = reciprocal_tree(denominators);
    BigRational::new(num, den)
}

/// Exact `Σ 1/d` when the denominators are pairwise coprime; the result is
/// already in lowest terms so no gcd is taken.
pub fn sum_reciprocals_coprime(denominators: &[u64]) -> BigRational {
    if denominators.is_empty() {
        return BigRational::zero();
    }
    let (num, den) = reciprocal_tree(denominators);
    BigRational::new_raw(num, den)
}

fn reciprocal_tree(ds: &[u64]) -> (BigInt, BigInt) {
    match ds.len() {
        1 => (BigInt::one(), BigInt::from(ds[0])),
        2 => (
            BigInt::from(ds[0]) + BigInt::from(ds[1]),
            BigInt::from(ds[0]) * BigInt::from(ds[1]),
        ),
        len => {
            let (l, r) = ds.split_at(len / 2);
            let (ln, ld) = reciprocal_tree(l);
            let (rn, rd) = reciprocal_tree(r);
            (&ln * &rd + &rn * &ld, ld * rd)
        }
    }
}

/// Renders a rational as `"p/q"`, or `"p"` when the denominator is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses `"p/q"`, `"p"`, or a finite decimal such as `"0.25"` exactly.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let int_digits = int.trim_start_matches(['-', '+']);
        if !frac.chars().all(|c| c.is_ascii_digit()) || frac.is_empty() && int_digits.is_empty() {
            return None;
        }
        let digits = format!("{int_digits}{frac}");
        let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
        let d = num_traits::pow(BigInt::from(10u32), frac.len());
        let r = BigRational::new(n, d);
        return Some(if negative { -r } else { r });
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// Lossy conversion used for reporting.
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational image of a finite float.
pub fn from_f64(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}
