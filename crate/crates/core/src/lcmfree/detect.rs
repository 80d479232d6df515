use std::collections::HashMap;

use num_integer::Integer;

use super::LcmInstance;
use crate::error::{Error, Result};

/// Least common multiple. Two `u64` values always fit in `u128`, so this
/// never wraps.
#[inline]
pub fn lcm(a: u64, b: u64) -> u128 {
    (a / a.gcd(&b)) as u128 * b as u128
}

fn check_k(k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::invalid(format!("k must be at least 3, got {k}")));
    }
    Ok(())
}

/// Smallest LCM-k-tuple in lexicographic element order, if any.
///
/// For each anchor `a` (ascending) the larger elements are bucketed by
/// `lcm(a, b)`; inside a bucket with common value `m` a (k−1)-clique of the
/// graph "pairwise lcm equals m" completes the tuple.
pub fn find_lcm_k_tuple(instance: &LcmInstance, k: usize) -> Result<Option<Vec<u64>>> {
    check_k(k)?;
    let xs = instance.elements();
    if xs.len() < k {
        return Ok(None);
    }
    let mut buckets: HashMap<u128, Vec<usize>> = HashMap::new();
    for i in 0..=xs.len() - k {
        buckets.clear();
        for j in i + 1..xs.len() {
            buckets.entry(lcm(xs[i], xs[j])).or_default().push(j);
        }
        let mut best: Option<Vec<usize>> = None;
        for (&m, members) in &buckets {
            if members.len() < k - 1 {
                continue;
            }
            let mut chosen = vec![i];
            if clique(xs, members, 0, k, m, &mut chosen) && best.as_ref().map_or(true, |b| chosen < *b) {
                best = Some(chosen);
            }
        }
        if let Some(b) = best {
            return Ok(Some(b.into_iter().map(|i| xs[i]).collect()));
        }
    }
    Ok(None)
}

fn clique(xs: &[u64], cands: &[usize], from: usize, k: usize, m: u128, chosen: &mut Vec<usize>) -> bool {
    if chosen.len() == k {
        return true;
    }
    for pos in from..cands.len() {
        if cands.len() - pos < k - chosen.len() {
            return false;
        }
        let c = cands[pos];
        if chosen[1..].iter().all(|&x| lcm(xs[x], xs[c]) == m) {
            chosen.push(c);
            if clique(xs, cands, pos + 1, k, m, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Plain k-subset enumeration; the cross-check for [`find_lcm_k_tuple`].
pub fn find_lcm_k_tuple_naive(instance: &LcmInstance, k: usize) -> Result<Option<Vec<u64>>> {
    check_k(k)?;
    fn rec(xs: &[u64], k: usize, from: usize, cur: &mut Vec<u64>) -> bool {
        if cur.len() == k {
            let m = lcm(cur[0], cur[1]);
            return (0..k).all(|i| (i + 1..k).all(|j| lcm(cur[i], cur[j]) == m));
        }
        for i in from..xs.len() {
            cur.push(xs[i]);
            if rec(xs, k, i + 1, cur) {
                return true;
            }
            cur.pop();
        }
        false
    }
    let mut cur = Vec::with_capacity(k);
    Ok(rec(instance.elements(), k, 0, &mut cur).then_some(cur))
}

pub fn is_lcm_k_free(instance: &LcmInstance, k: usize) -> Result<bool> {
    Ok(find_lcm_k_tuple(instance, k)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        let inst = LcmInstance::new([6, 10, 15]).unwrap();
        assert_eq!(find_lcm_k_tuple(&inst, 3).unwrap(), Some(vec![6, 10, 15]));
        assert_eq!(find_lcm_k_tuple(&LcmInstance::new([2, 3, 4]).unwrap(), 3).unwrap(), None);
        assert_eq!(find_lcm_k_tuple(&LcmInstance::new([1, 2]).unwrap(), 3).unwrap(), None);
        assert!(is_lcm_k_free(&LcmInstance::new([1, 2, 3]).unwrap(), 3).unwrap());
        assert!(!is_lcm_k_free(&LcmInstance::new([6, 10, 15, 77]).unwrap(), 3).unwrap());
        assert!(is_lcm_k_free(&LcmInstance::new([]).unwrap(), 3).unwrap());
        assert!(find_lcm_k_tuple(&inst, 2).is_err());
    }

    #[test]
    fn large_values_do_not_wrap() {
        let p = 4_294_967_291u64; // largest prime below 2^32
        let q = 4_294_967_279u64;
        assert_eq!(lcm(p * q, p), (p * q) as u128);
        let a = u64::MAX - 58; // prime
        assert_eq!(lcm(a, a - 1), a as u128 * (a - 1) as u128);
    }

    #[test]
    fn bucketed_matches_naive_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..2000 {
            let len = rng.gen_range(0..=20);
            let mut xs: Vec<u64> = (0..len).map(|_| rng.gen_range(1..=120)).collect();
            xs.sort_unstable();
            xs.dedup();
            let inst = LcmInstance::new(xs).unwrap();
            for k in 3..=4 {
                assert_eq!(
                    find_lcm_k_tuple(&inst, k).unwrap(),
                    find_lcm_k_tuple_naive(&inst, k).unwrap(),
                    "{:?} k={k}",
                    inst.elements()
                );
            }
        }
    }
}
