//! Sunflower and cosunflower detection.
//!
//! Witnesses are reported as member indices into the family's canonical
//! order and are always the lexicographically smallest index tuple.

use std::collections::HashMap;

use super::SetFamily;
use crate::error::{Error, Result};

/// Which equal-pairwise pattern a search looks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pattern {
    /// Constant pairwise intersections.
    Sunflower,
    /// Constant pairwise unions.
    Cosunflower,
}

impl Pattern {
    #[inline]
    pub fn combine(self, a: u64, b: u64) -> u64 {
        match self {
            Pattern::Sunflower => a & b,
            Pattern::Cosunflower => a | b,
        }
    }

    pub fn dual(self) -> Pattern {
        match self {
            Pattern::Sunflower => Pattern::Cosunflower,
            Pattern::Cosunflower => Pattern::Sunflower,
        }
    }
}

fn pairwise_constant(sets: &[u64], pattern: Pattern) -> bool {
    if sets.len() < 2 {
        return true;
    }
    let key = pattern.combine(sets[0], sets[1]);
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            if pattern.combine(sets[i], sets[j]) != key {
                return false;
            }
        }
    }
    true
}

/// True when all pairwise intersections coincide. Repeated sets allowed.
pub fn pairwise_intersections_equal(sets: &[u64]) -> bool {
    pairwise_constant(sets, Pattern::Sunflower)
}

/// True when all pairwise unions coincide. Repeated sets allowed.
pub fn pairwise_unions_equal(sets: &[u64]) -> bool {
    pairwise_constant(sets, Pattern::Cosunflower)
}

fn check_distinct(sets: &[u64]) -> Result<()> {
    if sets.len() < 2 {
        return Err(Error::invalid(format!("need at least 2 sets, got {}", sets.len())));
    }
    let mut sorted = sets.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::invalid("sets must be distinct"));
    }
    Ok(())
}

pub fn is_sunflower(sets: &[u64]) -> Result<bool> {
    check_distinct(sets)?;
    Ok(pairwise_intersections_equal(sets))
}

pub fn is_cosunflower(sets: &[u64]) -> Result<bool> {
    check_distinct(sets)?;
    Ok(pairwise_unions_equal(sets))
}

/// Every element lies in none of the sets or in at least `k − 1` of them,
/// where `k = sets.len()`. Equivalent to constant pairwise unions.
pub fn zero_or_many_check(sets: &[u64]) -> Result<bool> {
    let k = sets.len();
    if k < 3 {
        return Err(Error::invalid(format!("need k >= 3 sets, got {k}")));
    }
    let all = sets.iter().fold(0u64, |acc, &s| acc | s);
    let mut m = all;
    while m != 0 {
        let bit = m & m.wrapping_neg();
        let count = sets.iter().filter(|&&s| s & bit != 0).count();
        if count < k - 1 {
            return Ok(false);
        }
        m &= m - 1;
    }
    Ok(true)
}

fn check_k(k: usize) -> Result<()> {
    if k < 3 {
        return Err(Error::invalid(format!("k must be at least 3, got {k}")));
    }
    Ok(())
}

/// Smallest index tuple `(i, j₂, …, j_k)` with a common pairwise value,
/// found by anchoring the first index and grouping the rest by their
/// combined value with the anchor. Within a group only cliques remain to be
/// found.
fn grouped(sets: &[u64], k: usize, pattern: Pattern) -> Option<Vec<usize>> {
    if sets.len() < k {
        return None;
    }
    let mut groups: HashMap<u64, Vec<usize>> = HashMap::new();
    for i in 0..=sets.len() - k {
        groups.clear();
        for j in i + 1..sets.len() {
            groups.entry(pattern.combine(sets[i], sets[j])).or_default().push(j);
        }
        let mut best: Option<Vec<usize>> = None;
        for (&key, members) in &groups {
            if members.len() < k - 1 {
                continue;
            }
            let mut chosen = Vec::with_capacity(k);
            chosen.push(i);
            if smallest_clique(sets, members, 0, k, key, pattern, &mut chosen) && best.as_ref().map_or(true, |b| chosen < *b) {
                best = Some(chosen);
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

fn smallest_clique(
    sets: &[u64],
    candidates: &[usize],
    from: usize,
    k: usize,
    key: u64,
    pattern: Pattern,
    chosen: &mut Vec<usize>,
) -> bool {
    if chosen.len() == k {
        return true;
    }
    let need = k - chosen.len();
    for pos in from..candidates.len() {
        if candidates.len() - pos < need {
            break;
        }
        let c = candidates[pos];
        // the anchor (chosen[0]) is compatible with every candidate already
        if chosen[1..].iter().all(|&x| pattern.combine(sets[x], sets[c]) == key) {
            chosen.push(c);
            if smallest_clique(sets, candidates, pos + 1, k, key, pattern, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}

/// Ascending k-subset enumeration with pruning once the common value is
/// fixed by the first pair.
fn enumerate(sets: &[u64], k: usize, pattern: Pattern) -> Option<Vec<usize>> {
    fn rec(sets: &[u64], k: usize, pattern: Pattern, from: usize, key: Option<u64>, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == k {
            return true;
        }
        let need = k - chosen.len();
        for c in from..sets.len() {
            if sets.len() - c < need {
                break;
            }
            let next_key = match (key, chosen.first()) {
                (None, Some(&a)) => Some(pattern.combine(sets[a], sets[c])),
                _ => key,
            };
            let ok = match next_key {
                None => true,
                Some(kv) => chosen.iter().all(|&x| pattern.combine(sets[x], sets[c]) == kv),
            };
            if ok {
                chosen.push(c);
                if rec(sets, k, pattern, c + 1, next_key, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    let mut chosen = Vec::with_capacity(k);
    rec(sets, k, pattern, 0, None, &mut chosen).then_some(chosen)
}

/// Cosunflower search driven by the zero-or-many characterization: with
/// union `U` fixed by the first pair, the parts `U \ S` missed by the chosen
/// sets must be pairwise disjoint, so one running mask of missed elements
/// decides each candidate in constant time.
fn cosunflower_direct(sets: &[u64], k: usize) -> Option<Vec<usize>> {
    fn rec(sets: &[u64], k: usize, union: u64, missed: u64, cands: &[usize], from: usize, chosen: &mut Vec<usize>) -> bool {
        if chosen.len() == k {
            return true;
        }
        let need = k - chosen.len();
        for pos in from..cands.len() {
            if cands.len() - pos < need {
                break;
            }
            let c = cands[pos];
            let miss = union & !sets[c];
            if miss & missed == 0 {
                chosen.push(c);
                if rec(sets, k, union, missed | miss, cands, pos + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }

    if sets.len() < k {
        return None;
    }
    let mut groups: HashMap<u64, Vec<usize>> = HashMap::new();
    for i in 0..=sets.len() - k {
        groups.clear();
        for j in i + 1..sets.len() {
            groups.entry(sets[i] | sets[j]).or_default().push(j);
        }
        let mut best: Option<Vec<usize>> = None;
        for (&union, cands) in &groups {
            if cands.len() < k - 1 {
                continue;
            }
            let mut chosen = vec![i];
            if rec(sets, k, union, union & !sets[i], cands, 0, &mut chosen) && best.as_ref().map_or(true, |b| chosen < *b)
            {
                best = Some(chosen);
            }
        }
        if best.is_some() {
            return best;
        }
    }
    None
}

/// Lexicographically smallest k-tuple of indices of `sets` (in the given
/// order) forming the pattern. Entries of `sets` must be distinct.
pub fn find_pattern(sets: &[u64], k: usize, pattern: Pattern) -> Result<Option<Vec<usize>>> {
    check_k(k)?;
    Ok(if k == 3 { grouped(sets, k, pattern) } else { enumerate(sets, k, pattern) })
}

pub fn find_k_sunflower(family: &SetFamily, k: usize) -> Result<Option<Vec<usize>>> {
    find_pattern(family.members(), k, Pattern::Sunflower)
}

/// Grouped strategy for any `k`, exposed for cross-validation.
pub fn find_k_sunflower_grouped(family: &SetFamily, k: usize) -> Result<Option<Vec<usize>>> {
    check_k(k)?;
    Ok(grouped(family.members(), k, Pattern::Sunflower))
}

/// Pruned enumeration for any `k`, exposed for cross-validation.
pub fn find_k_sunflower_enumerate(family: &SetFamily, k: usize) -> Result<Option<Vec<usize>>> {
    check_k(k)?;
    Ok(enumerate(family.members(), k, Pattern::Sunflower))
}

/// Cosunflower search by complementation: complements are taken member by
/// member in the family's own order, so the witness indices refer to
/// `family`.
pub fn find_k_cosunflower(family: &SetFamily, k: usize) -> Result<Option<Vec<usize>>> {
    let u = family.universe();
    let comps: Vec<u64> = family.members().iter().map(|&m| u & !m).collect();
    find_pattern(&comps, k, Pattern::Sunflower)
}

pub fn find_k_cosunflower_direct(family: &SetFamily, k: usize) -> Result<Option<Vec<usize>>> {
    check_k(k)?;
    Ok(cosunflower_direct(family.members(), k))
}
