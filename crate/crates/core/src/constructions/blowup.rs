//! Integers built from a cosunflower-free family by choosing one prime
//! from each selected block.

use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{BlockPartition, CheckRecord, ConstructionKind, ConstructionParams, ConstructionReport, MaterializeOptions};
use crate::error::{Error, Result};
use crate::lcmfree::{is_lcm_k_free, LcmInstance};
use crate::rational::{sum_reciprocals, to_f64};
use crate::setfam::{blow_up, find_k_cosunflower, mask_elements, Blocks, SetFamily};

/// Largest family whose cosunflower-freeness is verified up front.
const BASE_CHECK_LIMIT: usize = 5_000;

/// `A = { Π_{i∈F} p_i : F ∈ family, p_i ∈ P_i }` for a family on `[t]` and
/// the first `t` blocks of a partition whose sums are all at least 1.
///
/// The harmonic sum `Σ_F Π_{i∈F} J_i` is computed exactly and compared with
/// `|family|`. The supports of `A` are the blow-up of `family`, so when the
/// blocks use at most 64 primes that blow-up is built and searched for
/// k-cosunflowers directly. Materialized or sampled elements are checked
/// for LCM-k-tuples.
pub fn family_blowup_construction(
    family: &SetFamily,
    k: usize,
    buckets: &BlockPartition,
    options: &MaterializeOptions,
) -> Result<ConstructionReport> {
    if k < 3 {
        return Err(Error::invalid(format!("k must be at least 3, got {k}")));
    }
    let t = family.ground_size();
    if buckets.len() < t {
        return Err(Error::invalid(format!("family needs {t} blocks but only {} are available", buckets.len())));
    }
    let blocks = &buckets.blocks()[..t];
    let sums = &buckets.sums()[..t];
    if let Some(i) = sums.iter().position(|j| *j < BigRational::one()) {
        return Err(Error::invalid(format!("block {i} has reciprocal sum {} < 1", to_f64(&sums[i]))));
    }
    let mut checks = Vec::new();
    if family.len() <= BASE_CHECK_LIMIT {
        if let Some(w) = find_k_cosunflower(family, k)? {
            return Err(Error::invalid(format!("family contains a {k}-cosunflower at members {w:?}")));
        }
        checks.push(CheckRecord::new("base_cosunflower_free", true, format!("{} members", family.len())));
    }

    let harmonic = family_sum(family, sums);
    let mut count: u128 = 0;
    for &f in family.members() {
        let idx = mask_elements(f);
        count = count.saturating_add(idx.iter().fold(1u128, |a, &i| a.saturating_mul(blocks[i].len() as u128)));
    }
    let at_least = harmonic >= BigRational::from_integer(family.len().into());
    checks.push(CheckRecord::new(
        "harmonic_sum_at_least_family_size",
        at_least,
        format!("{:.6} vs {}", to_f64(&harmonic), family.len()),
    ));

    let prime_count: usize = blocks.iter().map(Vec::len).sum();
    if prime_count <= 64 && count <= options.check_limit as u128 {
        let mut offset = 0;
        let masks: Vec<u64> = blocks
            .iter()
            .map(|b| {
                let m = crate::setfam::full_mask(b.len()) << offset;
                offset += b.len();
                m
            })
            .collect();
        let supports = blow_up(family, &Blocks::new(prime_count, masks, 0)?)?;
        let free = find_k_cosunflower(&supports, k)?.is_none();
        checks.push(CheckRecord::new("support_cosunflower_free", free, format!("{} supports over {prime_count} primes", supports.len())));
    }

    let mut report = ConstructionReport {
        kind: ConstructionKind::FamilyBlowup,
        params: ConstructionParams {
            k,
            r: None,
            t,
            threshold: to_f64(buckets.threshold()),
            delta: to_f64(buckets.delta()),
            synthetic: true,
            exponent: None,
        },
        harmonic_sum: harmonic,
        predicted_exponent: None,
        element_count: count,
        sampled_elements: None,
        truncated: false,
        checks,
    };

    let items = if options.enumerate {
        if count > options.cap as u128 && !options.allow_truncate {
            return Err(Error::CapExceeded { requested: count, cap: options.cap });
        }
        let items = enumerate_elements(family, blocks, count.min(options.cap as u128) as usize)?;
        report.truncated = (items.len() as u128) < count;
        Some(items)
    } else if options.samples > 0 && count > 0 {
        Some(sample_elements(family, blocks, options.samples, options.seed)?)
    } else {
        None
    };

    if let Some(items) = items {
        let instance = LcmInstance::with_factorizations(items)?;
        let elements = instance.elements().to_vec();
        if options.enumerate && !report.truncated {
            let ok = sum_reciprocals(&elements) == report.harmonic_sum;
            report.checks.push(CheckRecord::new("harmonic_identity", ok, format!("{} elements", elements.len())));
        }
        if elements.len() <= options.check_limit {
            let free = is_lcm_k_free(&instance, k)?;
            let scope = if options.enumerate && !report.truncated { "full set" } else { "sample" };
            report.checks.push(CheckRecord::new("lcm_k_free", free, format!("{scope} of {} elements", elements.len())));
        }
        report.sampled_elements = Some(elements);
    }
    Ok(report)
}

/// `Σ_{F ∈ family} Π_{i ∈ F} J_i`.
fn family_sum(family: &SetFamily, sums: &[BigRational]) -> BigRational {
    family
        .members()
        .iter()
        .map(|&f| mask_elements(f).iter().fold(BigRational::one(), |a, &i| a * &sums[i]))
        .fold(BigRational::zero(), |a, x| a + x)
}

type Factored = (u64, Vec<(u64, u32)>);

fn element(primes: Vec<u64>) -> Result<Factored> {
    let prod = primes
        .iter()
        .try_fold(1u64, |a, &p| a.checked_mul(p))
        .ok_or_else(|| Error::Resource("element exceeds 64 bits".into()))?;
    Ok((prod, primes.into_iter().map(|p| (p, 1)).collect()))
}

fn enumerate_elements(family: &SetFamily, blocks: &[Vec<u64>], limit: usize) -> Result<Vec<Factored>> {
    let mut out = Vec::new();
    for &f in family.members() {
        let idx = mask_elements(f);
        let mut odometer = vec![0usize; idx.len()];
        loop {
            if out.len() == limit {
                return Ok(out);
            }
            out.push(element(idx.iter().zip(&odometer).map(|(&i, &j)| blocks[i][j]).collect())?);
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                odometer[pos] += 1;
                if odometer[pos] < blocks[idx[pos]].len() {
                    break;
                }
                odometer[pos] = 0;
            }
            if odometer.iter().all(|&j| j == 0) {
                break;
            }
        }
    }
    Ok(out)
}

/// Distinct random elements: a uniform member, then a uniform prime from
/// each of its blocks.
fn sample_elements(family: &SetFamily, blocks: &[Vec<u64>], samples: usize, seed: u64) -> Result<Vec<Factored>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Factored> = Vec::with_capacity(samples);
    let mut seen = std::collections::HashSet::new();
    for _ in 0..samples {
        let f = family.members()[rng.gen_range(0..family.len())];
        let primes: Vec<u64> = mask_elements(f).into_iter().map(|i| blocks[i][rng.gen_range(0..blocks[i].len())]).collect();
        let e = element(primes)?;
        if seen.insert(e.0) {
            out.push(e);
        }
    }
    Ok(out)
}
