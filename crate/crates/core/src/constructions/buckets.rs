//! Greedy prime bucketing and the scale parameters that drive it.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::rational::from_f64;

/// Disjoint prime blocks produced by [`greedy_buckets`].
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    blocks: Vec<Vec<u64>>,
    sums: Vec<BigRational>,
    leftovers: Vec<u64>,
    threshold: BigRational,
    delta: BigRational,
}

impl BlockPartition {
    /// Builds a partition from explicit blocks. The threshold is the
    /// smallest block sum and `δ` the largest reciprocal used.
    pub fn from_blocks(blocks: Vec<Vec<u64>>) -> Result<Self> {
        let mut all: Vec<u64> = blocks.iter().flatten().copied().collect();
        if all.iter().any(|&p| p < 2) {
            return Err(Error::invalid("block entries must be at least 2"));
        }
        all.sort_unstable();
        if all.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("blocks must be pairwise disjoint"));
        }
        let mut blocks = blocks;
        for b in &mut blocks {
            b.sort_unstable();
        }
        let sums: Vec<BigRational> = blocks.iter().map(|b| block_sum(b)).collect();
        let threshold = sums.iter().min().cloned().unwrap_or_else(BigRational::zero);
        let delta = all.first().map_or_else(BigRational::zero, |&p| recip(p));
        Ok(BlockPartition { blocks, sums, leftovers: Vec::new(), threshold, delta })
    }

    pub fn blocks(&self) -> &[Vec<u64>] {
        &self.blocks
    }

    /// `J_i = Σ_{p ∈ P_i} 1/p` for each block.
    pub fn sums(&self) -> &[BigRational] {
        &self.sums
    }

    pub fn leftovers(&self) -> &[u64] {
        &self.leftovers
    }

    pub fn threshold(&self) -> &BigRational {
        &self.threshold
    }

    pub fn delta(&self) -> &BigRational {
        &self.delta
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Keeps only the first `t` blocks; the rest join the leftovers.
    pub fn truncated(&self, t: usize) -> BlockPartition {
        let mut out = self.clone();
        if t < out.blocks.len() {
            for b in out.blocks.drain(t..) {
                out.leftovers.extend(b);
            }
            out.sums.truncate(t);
            out.leftovers.sort_unstable();
        }
        out
    }
}

fn recip(p: u64) -> BigRational {
    BigRational::new(1.into(), p.into())
}

fn block_sum(block: &[u64]) -> BigRational {
    block.iter().fold(BigRational::zero(), |acc, &p| acc + recip(p))
}

/// Fills blocks left to right, closing each one as soon as its reciprocal
/// sum reaches `threshold`.
///
/// With `count_target = Some(t)` bucketing stops after `t` blocks and
/// fewer is a [`Error::Shortfall`]; with `None` as many blocks as possible
/// are made and at least one is required. The unfinished tail goes to
/// `leftovers`. `δ` is `1/min(primes)`, so every block satisfies
/// `B ≤ J_i < B + δ`.
pub fn greedy_buckets(primes: &[u64], threshold: &BigRational, count_target: Option<usize>) -> Result<BlockPartition> {
    let part = fill(primes, threshold, count_target)?;
    let target = count_target.unwrap_or(1);
    if part.len() < target {
        return Err(Error::Shortfall { achieved: part.len(), target });
    }
    Ok(part)
}

/// As [`greedy_buckets`] with no count target, but returning whatever was
/// formed, possibly no blocks at all.
pub fn greedy_buckets_partial(primes: &[u64], threshold: &BigRational) -> Result<BlockPartition> {
    fill(primes, threshold, None)
}

fn fill(primes: &[u64], threshold: &BigRational, count_target: Option<usize>) -> Result<BlockPartition> {
    if *threshold <= BigRational::zero() {
        return Err(Error::invalid("threshold must be positive"));
    }
    if primes.windows(2).any(|w| w[0] >= w[1]) || primes.first().is_some_and(|&p| p < 2) {
        return Err(Error::invalid("primes must be strictly ascending and at least 2"));
    }
    let mut blocks = Vec::new();
    let mut sums = Vec::new();
    let mut cur = Vec::new();
    let mut acc = BigRational::zero();
    let mut used = 0;
    for (i, &p) in primes.iter().enumerate() {
        if count_target.is_some_and(|t| blocks.len() == t) {
            break;
        }
        cur.push(p);
        acc += recip(p);
        used = i + 1;
        if acc >= *threshold {
            blocks.push(std::mem::take(&mut cur));
            sums.push(std::mem::replace(&mut acc, BigRational::zero()));
        }
    }
    let mut leftovers = cur;
    leftovers.extend_from_slice(&primes[used..]);
    Ok(BlockPartition {
        blocks,
        sums,
        leftovers,
        threshold: threshold.clone(),
        delta: primes.first().map_or_else(BigRational::zero, |&p| recip(p)),
    })
}

/// Greedy bucketing with threshold 1, the setting of the family blow-up
/// construction.
pub fn unit_buckets(primes: &[u64], count_target: Option<usize>) -> Result<BlockPartition> {
    greedy_buckets(primes, &BigRational::one(), count_target)
}

/// Whether the lower end of a prime window is included.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntervalConvention {
    /// `y ≤ p ≤ x`
    #[default]
    Closed,
    /// `y < p ≤ x`
    HalfOpen,
}

/// Primes of the window between `y` and `x` under the given convention.
pub fn bucket_pool(table: &PrimeTable, y: f64, x: f64, convention: IntervalConvention) -> Result<Vec<u64>> {
    let slice = match convention {
        IntervalConvention::Closed => table.primes_in_closed(y, x)?,
        IntervalConvention::HalfOpen => {
            let s = table.primes_in_closed(y, x)?;
            let skip = s.iter().take_while(|&&p| p as f64 <= y).count();
            &s[skip..]
        }
    };
    Ok(slice.to_vec())
}

/// Parameters a construction would use at a given `N`, reported in
/// logarithmic form because `x` and `y` are far beyond anything storable.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScaleParams {
    /// `L = log log N`
    pub lnln_n: f64,
    pub delta: f64,
    pub t: u64,
    pub threshold: f64,
    /// `log x` where primes are drawn from `[y, x]`
    pub ln_x: f64,
    pub ln_y: f64,
}

/// Parameters of the uniform subset construction: `δ = L^{-1/2}`,
/// `t = ⌊(1−δ)L/B⌋`, `x = N^{1/(rt)}`, `y = exp(L^{1/3})`.
pub fn subset_scale_params(lnln_n: f64, k: usize, threshold: f64) -> Result<ScaleParams> {
    if k < 3 {
        return Err(Error::invalid(format!("k must be at least 3, got {k}")));
    }
    if !(lnln_n > 1.0) || !(threshold > 0.0) {
        return Err(Error::Domain(format!("need log log N > 1 and B > 0, got {lnln_n} and {threshold}")));
    }
    let l = lnln_n;
    let delta = l.powf(-0.5);
    let t = ((1.0 - delta) * l / threshold).floor();
    if t < 1.0 {
        return Err(Error::Domain(format!("log log N = {l} leaves no room for a block")));
    }
    let r = (k - 2) as f64;
    Ok(ScaleParams {
        lnln_n: l,
        delta,
        t: t as u64,
        threshold,
        ln_x: l.exp() / (r * t),
        ln_y: l.powf(1.0 / 3.0),
    })
}

/// Parameters of the family blow-up construction: `t = ⌊L − 2 log L⌋`,
/// `δ = 1/L`, `y = L²`, `x = N^{1/t}`, threshold 1.
pub fn blowup_scale_params(lnln_n: f64) -> Result<ScaleParams> {
    if !(lnln_n > 1.0) {
        return Err(Error::Domain(format!("need log log N > 1, got {lnln_n}")));
    }
    let l = lnln_n;
    let t = (l - 2.0 * l.ln()).floor();
    if t < 1.0 {
        return Err(Error::Domain(format!("log log N = {l} leaves no room for a block")));
    }
    Ok(ScaleParams {
        lnln_n: l,
        delta: 1.0 / l,
        t: t as u64,
        threshold: 1.0,
        ln_x: l.exp() / t,
        ln_y: 2.0 * l.ln(),
    })
}

/// Threshold given as a float, converted exactly.
pub fn threshold_from_f64(b: f64) -> Result<BigRational> {
    from_f64(b).filter(|q| *q > BigRational::zero()).ok_or_else(|| Error::invalid(format!("bad threshold {b}")))
}
