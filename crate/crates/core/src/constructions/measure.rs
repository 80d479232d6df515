//! Product measures on families, weighted block partitions and the
//! blow-up pipeline that lifts a cosunflower-free family to a heavy one.

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::primes::PrimeTable;
use crate::rational::{format_rational, to_f64};
use crate::setfam::{blow_up, find_k_cosunflower, mask_elements, Blocks, SetFamily, MAX_GROUND};

/// Ground elements with inclusion probabilities `w_a ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGroundSet {
    labels: Vec<String>,
    weights: Vec<BigRational>,
}

impl WeightedGroundSet {
    pub fn new(labels: Vec<String>, weights: Vec<BigRational>) -> Result<Self> {
        if labels.len() != weights.len() {
            return Err(Error::invalid(format!("{} labels for {} weights", labels.len(), weights.len())));
        }
        if weights.len() > MAX_GROUND {
            return Err(Error::GroundSetOverflow(weights.len()));
        }
        if let Some(i) = weights.iter().position(|w| *w < BigRational::zero() || *w > BigRational::one()) {
            return Err(Error::invalid(format!("weight of {} is {}, outside [0, 1]", labels[i], format_rational(&weights[i]))));
        }
        Ok(WeightedGroundSet { labels, weights })
    }

    /// Elements labelled `0, 1, …`.
    pub fn unlabelled(weights: Vec<BigRational>) -> Result<Self> {
        let labels = (0..weights.len()).map(|i| i.to_string()).collect();
        Self::new(labels, weights)
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn weights(&self) -> &[BigRational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total(&self) -> BigRational {
        self.weights.iter().fold(BigRational::zero(), |a, w| a + w)
    }

    pub fn max_weight(&self) -> BigRational {
        self.weights.iter().max().cloned().unwrap_or_else(BigRational::zero)
    }
}

/// `w_p = 1/(p+1)` on the given primes.
pub fn prime_weights(primes: &[u64]) -> Result<WeightedGroundSet> {
    WeightedGroundSet::new(
        primes.iter().map(|p| p.to_string()).collect(),
        primes.iter().map(|&p| BigRational::new(1.into(), (p + 1).into())).collect(),
    )
}

fn check_ground(family: &SetFamily, wgs: &WeightedGroundSet) -> Result<()> {
    if family.ground_size() != wgs.len() {
        return Err(Error::invalid(format!(
            "family lives on {} elements but {} weights were given",
            family.ground_size(),
            wgs.len()
        )));
    }
    Ok(())
}

/// `μ_w(family) = Σ_{B∈family} Π_{a∈B} w_a Π_{a∉B} (1 − w_a)`.
pub fn product_measure(family: &SetFamily, wgs: &WeightedGroundSet) -> Result<BigRational> {
    check_ground(family, wgs)?;
    let one = BigRational::one();
    let comp: Vec<BigRational> = wgs.weights.iter().map(|w| &one - w).collect();
    let mut total = BigRational::zero();
    for &m in family.members() {
        let mut p = BigRational::one();
        for a in 0..wgs.len() {
            p *= if m >> a & 1 == 1 { &wgs.weights[a] } else { &comp[a] };
        }
        total += p;
    }
    Ok(total)
}

pub fn product_measure_f64(family: &SetFamily, wgs: &WeightedGroundSet) -> Result<f64> {
    check_ground(family, wgs)?;
    let w: Vec<f64> = wgs.weights.iter().map(to_f64).collect();
    Ok(crate::rational::compensated_sum(family.members().iter().map(|&m| {
        (0..w.len()).map(|a| if m >> a & 1 == 1 { w[a] } else { 1.0 - w[a] }).product::<f64>()
    })))
}

/// Blocks `A_1, …, A_n` and remainder `Ã` as lists of element indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WeightedPartition {
    pub blocks: Vec<Vec<usize>>,
    pub remainder: Vec<usize>,
}

/// Greedy partition into inclusion-minimal blocks of weight at least `c`.
///
/// Elements are taken in order until the running weight reaches `c`; then
/// any element whose removal keeps the weight at `c` or more is dropped
/// back to the front of the queue. Each block's weight is in
/// `[c, c + max w)`, and what is left over weighs less than `c`.
pub fn weighted_partition(wgs: &WeightedGroundSet, c: &BigRational) -> Result<WeightedPartition> {
    if *c <= BigRational::zero() || *c >= BigRational::one() {
        return Err(Error::invalid(format!("c must lie in (0, 1), got {}", format_rational(c))));
    }
    let mut queue: std::collections::VecDeque<usize> = (0..wgs.len()).collect();
    let mut blocks = Vec::new();
    loop {
        let mut block = Vec::new();
        let mut weight = BigRational::zero();
        while weight < *c {
            let Some(a) = queue.pop_front() else {
                let mut remainder = block;
                remainder.sort_unstable();
                return Ok(WeightedPartition { blocks, remainder });
            };
            weight += &wgs.weights[a];
            block.push(a);
        }
        let mut dropped = Vec::new();
        let mut i = 0;
        while i < block.len() {
            let w = &wgs.weights[block[i]];
            if &weight - w >= *c {
                weight -= w;
                dropped.push(block.remove(i));
            } else {
                i += 1;
            }
        }
        for a in dropped.into_iter().rev() {
            queue.push_front(a);
        }
        block.sort_unstable();
        blocks.push(block);
    }
}

/// Per-block quantities of the pipeline.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockStats {
    /// `r_i = Π (1 − w_a)`: probability the block is missed
    pub empty: BigRational,
    /// `q_i`: probability exactly one element of the block is drawn
    pub single: BigRational,
    pub weight: BigRational,
    /// `Σ w_a/(1 − w_a)`, or `None` if some weight is 1
    pub odds: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub partition: WeightedPartition,
    pub family: SetFamily,
    pub measure: BigRational,
    pub blocks: Vec<BlockStats>,
    /// `s = Π_{a∈Ã} (1 − w_a)`
    pub remainder_empty: BigRational,
    /// `s · Σ_F Π_{i∈F} q_i Π_{i∉F} r_i`
    pub measure_by_blocks: BigRational,
    pub base_verified: bool,
    pub output_verified: bool,
    /// `q_i/r_i = Σ w/(1−w) ≥ Σ w` for every block with `r_i > 0`
    pub ratio_checks_pass: bool,
}

impl PipelineReport {
    pub fn to_json(&self) -> serde_json::Value {
        let blocks: Vec<serde_json::Value> = self
            .blocks
            .iter()
            .map(|b| {
                serde_json::json!({
                    "r": format_rational(&b.empty),
                    "q": format_rational(&b.single),
                    "weight": format_rational(&b.weight),
                    "odds": b.odds.as_ref().map(format_rational),
                })
            })
            .collect();
        serde_json::json!({
            "kind": "weighted",
            "partition": self.partition,
            "family_size": self.family.len(),
            "measure": format_rational(&self.measure),
            "measure_float": to_f64(&self.measure),
            "measure_by_blocks": format_rational(&self.measure_by_blocks),
            "s": format_rational(&self.remainder_empty),
            "blocks": blocks,
            "base_verified": self.base_verified,
            "output_verified": self.output_verified,
            "ratio_checks_pass": self.ratio_checks_pass,
        })
    }
}

const BASE_VERIFY_MAX_N: usize = 20;
const OUTPUT_VERIFY_MAX: usize = 20_000;

/// Partitions the weighted ground set, blows `base` up over the blocks and
/// measures the result both directly and through the block decomposition.
pub fn weighted_cosunflower_pipeline(
    wgs: &WeightedGroundSet,
    c: &BigRational,
    base: &SetFamily,
    k: usize,
) -> Result<PipelineReport> {
    let partition = weighted_partition(wgs, c)?;
    let n = partition.blocks.len();
    if base.ground_size() != n {
        return Err(Error::invalid(format!("base family lives on {} indices but the partition has {n} blocks", base.ground_size())));
    }
    let base_verified = n <= BASE_VERIFY_MAX_N;
    if base_verified {
        if let Some(w) = find_k_cosunflower(base, k)? {
            return Err(Error::invalid(format!("base family contains a {k}-cosunflower at members {w:?}")));
        }
    }
    let to_mask = |idx: &[usize]| idx.iter().fold(0u64, |m, &a| m | 1 << a);
    let blocks = Blocks::new(wgs.len(), partition.blocks.iter().map(|b| to_mask(b)).collect(), to_mask(&partition.remainder))?;
    let family = blow_up(base, &blocks)?;
    let measure = product_measure(&family, wgs)?;

    let one = BigRational::one();
    let w = &wgs.weights;
    let stats: Vec<BlockStats> = partition
        .blocks
        .iter()
        .map(|b| {
            let empty = b.iter().fold(BigRational::one(), |acc, &a| acc * (&one - &w[a]));
            let single = b
                .iter()
                .map(|&a| b.iter().fold(BigRational::one(), |acc, &x| acc * if x == a { w[x].clone() } else { &one - &w[x] }))
                .fold(BigRational::zero(), |acc, x| acc + x);
            let weight = b.iter().fold(BigRational::zero(), |acc, &a| acc + &w[a]);
            let odds = b
                .iter()
                .map(|&a| (w[a] < one).then(|| &w[a] / (&one - &w[a])))
                .try_fold(BigRational::zero(), |acc, x| x.map(|x| acc + x));
            BlockStats { empty, single, weight, odds }
        })
        .collect();
    let s = partition.remainder.iter().fold(BigRational::one(), |acc, &a| acc * (&one - &w[a]));
    let mut by_blocks = BigRational::zero();
    for &f in base.members() {
        by_blocks += (0..n).fold(BigRational::one(), |acc, i| {
            acc * if f >> i & 1 == 1 { &stats[i].single } else { &stats[i].empty }
        });
    }
    by_blocks *= &s;

    let ratio_checks_pass = stats.iter().all(|b| match &b.odds {
        Some(odds) => b.empty.is_zero() || (&b.single / &b.empty == *odds && *odds >= b.weight),
        None => true,
    });
    let output_verified = family.len() <= OUTPUT_VERIFY_MAX;
    if output_verified && find_k_cosunflower(&family, k)?.is_some() {
        return Err(Error::Domain("blow-up produced a cosunflower".into()));
    }
    Ok(PipelineReport {
        partition,
        family,
        measure,
        blocks: stats,
        remainder_empty: s,
        measure_by_blocks: by_blocks,
        base_verified,
        output_verified,
        ratio_checks_pass,
    })
}

/// Both sides of `Σ_{Q∈family} 1/Π_{p∈Q} p = μ_w(family)/μ_w({∅})` for
/// `w_p = 1/(p+1)`, with `family` on the index set of `primes`.
pub fn harmonic_measure_identity(primes: &[u64], family: &SetFamily) -> Result<(BigRational, BigRational)> {
    let wgs = prime_weights(primes)?;
    let lhs = family
        .members()
        .iter()
        .map(|&m| {
            let prod: num_bigint::BigInt = mask_elements(m).iter().map(|&i| num_bigint::BigInt::from(primes[i])).product();
            BigRational::new(1.into(), prod)
        })
        .fold(BigRational::zero(), |a, x| a + x);
    let empty = SetFamily::new(primes.len(), [0u64])?;
    let rhs = product_measure(family, &wgs)? / product_measure(&empty, &wgs)?;
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailBound {
    pub majorant: f64,
    /// `Σ 1/Π_{p∈Q} p` over `Q ⊆ P` with `Π p > N`, when enumerated
    #[serde(serialize_with = "ser_opt_rational")]
    pub exact_tail: Option<BigRational>,
    pub holds: Option<bool>,
}

fn ser_opt_rational<S: serde::Serializer>(v: &Option<BigRational>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(q) => s.serialize_some(&format_rational(q)),
        None => s.serialize_none(),
    }
}

const TAIL_ENUM_MAX: usize = 20;

/// `(1/log N) · Π_{q∈P} (1 + 1/q) · Σ_{p∈P} (log p)/p`, which dominates the
/// reciprocal mass of subset products of `P` exceeding `N`. The tail itself
/// is enumerated when `|P| ≤ 20`.
pub fn tail_harmonic_bound(table: &PrimeTable, primes: &[u64], n: u64) -> Result<TailBound> {
    if n < 3 {
        return Err(Error::Domain(format!("N must be at least 3, got {n}")));
    }
    if let Some(p) = primes.iter().find(|&&p| !table.contains(p)) {
        return Err(Error::invalid(format!("{p} is not in the prime table")));
    }
    let prod: f64 = primes.iter().map(|&q| 1.0 + 1.0 / q as f64).product();
    let logs = crate::rational::compensated_sum(primes.iter().map(|&p| (p as f64).ln() / p as f64));
    let majorant = prod * logs / (n as f64).ln();
    if primes.len() > TAIL_ENUM_MAX {
        return Ok(TailBound { majorant, exact_tail: None, holds: None });
    }
    let mut denominators = Vec::new();
    for mask in 0u32..(1 << primes.len()) {
        let mut d: u128 = 1;
        for i in mask_elements(mask as u64) {
            d = d.saturating_mul(primes[i] as u128);
        }
        if d > n as u128 {
            denominators.push(num_bigint::BigInt::from(d));
        }
    }
    let tail = denominators
        .into_iter()
        .map(|d| BigRational::new(1.into(), d))
        .fold(BigRational::zero(), |a, x| a + x);
    let holds = to_f64(&tail) <= majorant;
    Ok(TailBound { majorant, exact_tail: Some(tail), holds: Some(holds) })
}
