//! Products of `r` primes from every block.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::{BlockPartition, CheckRecord, ConstructionKind, ConstructionParams, ConstructionReport, MaterializeOptions};
use crate::error::{Error, Result};
use crate::lcmfree::{is_lcm_k_free, LcmInstance};
use crate::rational::{sum_reciprocals, to_f64};

/// Elementary symmetric polynomial of degree `r`, by the column recurrence
/// `e_j ← e_j + w·e_{j−1}` run over the weights. Zero when `r` exceeds the
/// number of weights.
pub fn esym(weights: &[BigRational], r: usize) -> BigRational {
    if r > weights.len() {
        return BigRational::zero();
    }
    let mut e = vec![BigRational::zero(); r + 1];
    e[0] = BigRational::one();
    for (i, w) in weights.iter().enumerate() {
        for j in (1..=r.min(i + 1)).rev() {
            let add = &e[j - 1] * w;
            e[j] += add;
        }
    }
    e.pop().unwrap_or_else(BigRational::one)
}

pub fn esym_f64(weights: &[f64], r: usize) -> f64 {
    if r > weights.len() {
        return 0.0;
    }
    let mut e = vec![0.0; r + 1];
    e[0] = 1.0;
    for (i, &w) in weights.iter().enumerate() {
        for j in (1..=r.min(i + 1)).rev() {
            e[j] += w * e[j - 1];
        }
    }
    e[r]
}

pub fn ln_factorial(r: usize) -> f64 {
    statrs::function::factorial::ln_factorial(r as u64)
}

fn check_k(k: usize) -> Result<usize> {
    if k < 3 {
        return Err(Error::invalid(format!("k must be at least 3, got {k}")));
    }
    Ok(k - 2)
}

/// `g(B) = (r log B − log r!)/B`, the exponent contributed per unit of
/// `log log N` by blocks of reciprocal mass `B`.
pub fn exponent_g(r: usize, b: f64) -> f64 {
    (r as f64 * b.ln() - ln_factorial(r)) / b
}

/// The maximizer `B* = e·(r!)^{1/r}` of [`exponent_g`], with `r = k − 2`.
pub fn optimal_threshold(k: usize) -> Result<f64> {
    let r = check_k(k)?;
    Ok((1.0 + ln_factorial(r) / r as f64).exp())
}

/// `c_k = r / (e·(r!)^{1/r})`, the value of `g` at its maximizer.
pub fn subset_exponent(k: usize) -> Result<f64> {
    let r = check_k(k)?;
    Ok(r as f64 / optimal_threshold(k)?)
}

fn binomial(n: usize, r: usize) -> u128 {
    if r > n {
        return 0;
    }
    let mut c: u128 = 1;
    for i in 0..r.min(n - r) {
        c = c.saturating_mul((n - i) as u128) / (i as u128 + 1);
    }
    c
}

fn r_subsets(block: &[u64], r: usize) -> Result<Vec<(u64, Vec<u64>)>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        let primes: Vec<u64> = idx.iter().map(|&i| block[i]).collect();
        let prod = primes
            .iter()
            .try_fold(1u64, |a, &p| a.checked_mul(p))
            .ok_or_else(|| Error::Resource("element exceeds 64 bits".into()))?;
        out.push((prod, primes));
        let Some(i) = (0..r).rev().find(|&i| idx[i] != i + block.len() - r) else {
            return Ok(out);
        };
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// The set of products `Π_i Π_{p∈S_i} p` with each `S_i` an `r`-subset of
/// block `P_i`, `r = k − 2`.
///
/// The harmonic sum is `Π_i e_r({1/p : p ∈ P_i})` exactly. With
/// `options.enumerate` the set is written out (subject to the cap), its
/// reciprocal sum compared with the product formula, and LCM-k-freeness
/// checked when the set is small enough.
pub fn uniform_subset_construction(k: usize, buckets: &BlockPartition, options: &MaterializeOptions) -> Result<ConstructionReport> {
    let r = check_k(k)?;
    if let Some((i, b)) = buckets.blocks().iter().enumerate().find(|(_, b)| b.len() < r) {
        return Err(Error::invalid(format!("block {i} has {} primes, fewer than r = {r}", b.len())));
    }
    let mut harmonic = BigRational::one();
    let mut count: u128 = 1;
    for b in buckets.blocks() {
        let w: Vec<BigRational> = b.iter().map(|&p| BigRational::new(1.into(), p.into())).collect();
        harmonic *= esym(&w, r);
        count = count.saturating_mul(binomial(b.len(), r));
    }
    let threshold = to_f64(buckets.threshold());
    let exponent = exponent_g(r, threshold);
    let mut report = ConstructionReport {
        kind: ConstructionKind::UniformSubset,
        params: ConstructionParams {
            k,
            r: Some(r),
            t: buckets.len(),
            threshold,
            delta: to_f64(buckets.delta()),
            synthetic: true,
            exponent: Some(exponent),
        },
        harmonic_sum: harmonic,
        predicted_exponent: Some(exponent),
        element_count: count,
        sampled_elements: None,
        truncated: false,
        checks: Vec::new(),
    };
    if !options.enumerate {
        return Ok(report);
    }
    if count > options.cap as u128 && !options.allow_truncate {
        return Err(Error::CapExceeded { requested: count, cap: options.cap });
    }
    let limit = count.min(options.cap as u128) as usize;
    let per_block: Vec<Vec<(u64, Vec<u64>)>> = buckets.blocks().iter().map(|b| r_subsets(b, r)).collect::<Result<_>>()?;

    let mut items: Vec<(u64, Vec<(u64, u32)>)> = Vec::with_capacity(limit);
    let mut odometer = vec![0usize; per_block.len()];
    'outer: while items.len() < limit {
        let mut prod = 1u64;
        let mut primes = Vec::with_capacity(r * per_block.len());
        for (choice, &j) in per_block.iter().zip(&odometer) {
            prod = prod
                .checked_mul(choice[j].0)
                .ok_or_else(|| Error::Resource("element exceeds 64 bits".into()))?;
            primes.extend(choice[j].1.iter().map(|&p| (p, 1)));
        }
        items.push((prod, primes));
        for i in (0..odometer.len()).rev() {
            odometer[i] += 1;
            if odometer[i] < per_block[i].len() {
                continue 'outer;
            }
            odometer[i] = 0;
        }
        break;
    }
    report.truncated = (items.len() as u128) < count;
    let instance = LcmInstance::with_factorizations(items)?;
    let elements = instance.elements().to_vec();

    if !report.truncated {
        let sum = sum_reciprocals(&elements);
        let ok = sum == report.harmonic_sum;
        report.checks.push(CheckRecord::new(
            "harmonic_identity",
            ok,
            format!("enumerated sum of {} reciprocals {} the block product", elements.len(), if ok { "equals" } else { "differs from" }),
        ));
    }
    if elements.len() <= options.check_limit {
        let free = is_lcm_k_free(&instance, k)?;
        let scope = if report.truncated { "truncated sample" } else { "full set" };
        report.checks.push(CheckRecord::new("lcm_k_free", free, format!("{scope} of {} elements", elements.len())));
    }
    report.sampled_elements = Some(elements);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constructions::greedy_buckets;
    use crate::primes::PrimeTable;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn esym_by_subsets(w: &[BigRational], r: usize) -> BigRational {
        let mut total = BigRational::zero();
        for mask in 0u32..(1 << w.len()) {
            if mask.count_ones() as usize == r {
                total += (0..w.len())
                    .filter(|&i| mask >> i & 1 == 1)
                    .fold(BigRational::one(), |a, i| a * &w[i]);
            }
        }
        total
    }

    #[test]
    fn esym_examples() {
        assert_eq!(esym(&[q(1, 2), q(1, 3)], 1), q(5, 6));
        assert_eq!(esym(&[q(1, 2), q(1, 3), q(1, 5)], 2), q(1, 3));
        assert_eq!(esym(&[q(1, 7)], 0), q(1, 1));
        assert_eq!(esym(&[], 0), q(1, 1));
        assert_eq!(esym(&[q(1, 2)], 2), q(0, 1));
    }

    #[test]
    fn esym_matches_subset_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..60 {
            let n = rng.gen_range(0..=15);
            let w: Vec<BigRational> = (0..n).map(|_| q(rng.gen_range(1..20), rng.gen_range(1..50))).collect();
            for r in 0..=n + 1 {
                assert_eq!(esym(&w, r), esym_by_subsets(&w, r));
                let wf: Vec<f64> = w.iter().map(to_f64).collect();
                let exact = to_f64(&esym(&w, r));
                assert!((esym_f64(&wf, r) - exact).abs() <= 1e-12 * exact.max(1.0));
            }
        }
    }

    #[test]
    fn optimal_threshold_values() {
        assert!((optimal_threshold(3).unwrap() - std::f64::consts::E).abs() < 1e-12);
        assert!((subset_exponent(3).unwrap() - (-1f64).exp()).abs() < 1e-12);
        let c4 = 2.0 / (std::f64::consts::E * 2f64.sqrt());
        assert!((subset_exponent(4).unwrap() - c4).abs() < 1e-12);
        assert!((subset_exponent(4).unwrap() - 0.5202601).abs() < 1e-7);
        for k in 3..=10 {
            let b = optimal_threshold(k).unwrap();
            let r = k - 2;
            assert!((exponent_g(r, b) - subset_exponent(k).unwrap()).abs() < 1e-12);
            for f in [0.5, 0.9, 1.1, 2.0] {
                assert!(exponent_g(r, b * f) < exponent_g(r, b));
            }
        }
        assert!(optimal_threshold(2).is_err());
    }

    #[test]
    fn two_block_example() {
        let part = BlockPartition::from_blocks(vec![vec![2, 3], vec![5, 7]]).unwrap();
        let opts = MaterializeOptions { enumerate: true, ..Default::default() };
        let rep = uniform_subset_construction(4, &part, &opts).unwrap();
        assert_eq!(rep.harmonic_sum, q(1, 210));
        assert_eq!(rep.sampled_elements, Some(vec![210]));
        assert!(rep.all_checks_passed());
        assert_eq!(rep.checks.len(), 2);
    }

    #[test]
    fn degree_one_is_product_of_sums() {
        let table = PrimeTable::new(300).unwrap();
        let part = greedy_buckets(&table.primes()[3..], &q(1, 2), None).unwrap();
        let opts = MaterializeOptions { enumerate: true, ..Default::default() };
        let rep = uniform_subset_construction(3, &part, &opts).unwrap();
        let prod = part.sums().iter().fold(BigRational::one(), |a, s| a * s);
        assert_eq!(rep.harmonic_sum, prod);
        assert!(rep.all_checks_passed());
    }

    #[test]
    fn three_prime_blocks_enumerate() {
        let part = BlockPartition::from_blocks(vec![vec![2, 3, 5], vec![7, 11, 13], vec![17, 19, 23, 29]]).unwrap();
        let opts = MaterializeOptions { enumerate: true, ..Default::default() };
        let rep = uniform_subset_construction(4, &part, &opts).unwrap();
        assert_eq!(rep.element_count, 3 * 3 * 6);
        assert!(rep.all_checks_passed(), "{:?}", rep.checks);
    }

    #[test]
    fn cap_and_truncation() {
        let part = BlockPartition::from_blocks(vec![vec![2, 3, 5], vec![7, 11, 13]]).unwrap();
        let opts = MaterializeOptions { enumerate: true, cap: 4, ..Default::default() };
        assert_eq!(
            uniform_subset_construction(4, &part, &opts).unwrap_err(),
            Error::CapExceeded { requested: 9, cap: 4 }
        );
        let opts = MaterializeOptions { allow_truncate: true, ..opts };
        let rep = uniform_subset_construction(4, &part, &opts).unwrap();
        assert!(rep.truncated);
        assert_eq!(rep.sampled_elements.as_ref().unwrap().len(), 4);
        assert!(rep.checks.iter().all(|c| c.name != "harmonic_identity"));
        assert!(uniform_subset_construction(5, &part, &opts).is_ok());
        assert!(uniform_subset_construction(6, &part, &opts).is_err());
    }

    #[test]
    fn report_json_shape() {
        let part = BlockPartition::from_blocks(vec![vec![2, 3], vec![5, 7]]).unwrap();
        let rep = uniform_subset_construction(4, &part, &MaterializeOptions::default()).unwrap();
        let v = serde_json::to_value(&rep).unwrap();
        assert_eq!(v["harmonic_sum"], "1/210");
        assert_eq!(v["construction_params"]["r"], 2);
        assert_eq!(v["kind"], "uniform-subset");
        assert!(v["freeness_checks"].as_array().unwrap().is_empty());
        assert_eq!(ConstructionReport::csv_header().split(',').count(), rep.csv_row().split(',').count());
    }
}
