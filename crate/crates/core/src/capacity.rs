//! Exact `F_k(n)` by branch-and-bound, capacity estimates, and the registry
//! of published bounds on the sunflower-free capacity.

use std::time::{Duration, Instant};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::setfam::{Pattern, SetFamily};

/// Largest `n` for which the search is certified exact by default.
pub const DEFAULT_EXACT_CEILING: usize = 5;
/// Largest `n` the search will attempt at all.
pub const MAX_SEARCH_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    /// Node budget shared by both search phases.
    pub budget: u64,
    /// Results for `n` above this are reported as lower bounds only.
    pub exact_ceiling: usize,
    /// Bound by the number of remaining candidates that are still
    /// compatible with the chosen sets, instead of all remaining candidates.
    pub refined_bound: bool,
    /// Fix the smallest chosen set to `{0, …, r−1}` at the root.
    pub root_symmetry: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 50_000_000,
            exact_ceiling: DEFAULT_EXACT_CEILING,
            refined_bound: false,
            root_symmetry: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub n: usize,
    pub k: usize,
    pub f_value: usize,
    pub witness: SetFamily,
    pub nodes_explored: u64,
    pub elapsed: Duration,
    /// False when the budget ran out or `n` is above the exact ceiling; the
    /// value is then only a lower bound.
    pub exact: bool,
}

impl Serialize for CapacityResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("CapacityResult", 6)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("F", &self.f_value)?;
        st.serialize_field("witness", &self.witness)?;
        st.serialize_field("exact", &self.exact)?;
        st.serialize_field("nodes", &self.nodes_explored)?;
        st.end()
    }
}

/// Does some `(size)`-subset of `pool` have all pairwise combinations equal
/// to `key`?
fn has_clique(pool: &[u64], size: usize, key: u64, pattern: Pattern) -> bool {
    fn rec(pool: &[u64], size: usize, key: u64, pattern: Pattern, from: usize, chosen: &mut Vec<u64>) -> bool {
        if chosen.len() == size {
            return true;
        }
        for i in from..pool.len() {
            if pool.len() - i < size - chosen.len() {
                return false;
            }
            let c = pool[i];
            if chosen.iter().all(|&x| pattern.combine(x, c) == key) {
                chosen.push(c);
                if rec(pool, size, key, pattern, i + 1, chosen) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    if size == 0 {
        return true;
    }
    rec(pool, size, key, pattern, 0, &mut Vec::with_capacity(size))
}

/// Would `d` complete a k-pattern together with `c` and k−2 of `chosen`?
fn completes_with(chosen: &[u64], c: u64, d: u64, k: usize, pattern: Pattern) -> bool {
    let key = pattern.combine(c, d);
    let pool: Vec<u64> = chosen
        .iter()
        .copied()
        .filter(|&x| pattern.combine(x, c) == key && pattern.combine(x, d) == key)
        .collect();
    pool.len() >= k - 2 && has_clique(&pool, k - 2, key, pattern)
}

struct Search<'a> {
    cands: &'a [u64],
    k: usize,
    pattern: Pattern,
    refined: bool,
    budget: u64,
    nodes: u64,
    exhausted: bool,
    chosen: Vec<u64>,
    /// blocked[i] > 0: candidate i would complete a pattern with chosen sets
    blocked: Vec<u32>,
    best: Vec<u64>,
    /// Stop at the first family of this size (witness sweep).
    target: Option<usize>,
    done: bool,
}

impl<'a> Search<'a> {
    fn new(cands: &'a [u64], k: usize, pattern: Pattern, refined: bool, budget: u64) -> Self {
        Search {
            cands,
            k,
            pattern,
            refined,
            budget,
            nodes: 0,
            exhausted: false,
            chosen: Vec::new(),
            blocked: vec![0; cands.len()],
            best: Vec::new(),
            target: None,
            done: false,
        }
    }

    fn bound(&self, pos: usize) -> usize {
        let rest = if self.refined {
            (pos..self.cands.len()).filter(|&i| self.blocked[i] == 0).count()
        } else {
            self.cands.len() - pos
        };
        self.chosen.len() + rest
    }

    /// Adds candidate `i`, returning the indices it newly blocks.
    fn push(&mut self, i: usize) -> Vec<usize> {
        let c = self.cands[i];
        let mut newly = Vec::new();
        for j in i + 1..self.cands.len() {
            if self.blocked[j] == 0 && completes_with(&self.chosen, c, self.cands[j], self.k, self.pattern) {
                newly.push(j);
            }
        }
        for &j in &newly {
            self.blocked[j] += 1;
        }
        self.chosen.push(c);
        newly
    }

    fn pop(&mut self, newly: Vec<usize>) {
        self.chosen.pop();
        for j in newly {
            self.blocked[j] -= 1;
        }
    }

    fn dfs(&mut self, pos: usize) {
        if self.exhausted || self.done {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if self.chosen.len() > self.best.len() {
            self.best = self.chosen.clone();
        }
        if let Some(t) = self.target {
            if self.chosen.len() == t {
                self.best = self.chosen.clone();
                self.done = true;
                return;
            }
        }
        let need = self.target.map_or(self.best.len() + 1, |t| t);
        if self.bound(pos) < need {
            return;
        }
        // next candidate that can still be added
        let Some(i) = (pos..self.cands.len()).find(|&i| self.blocked[i] == 0) else {
            return;
        };
        let newly = self.push(i);
        self.dfs(i + 1);
        self.pop(newly);
        if self.done {
            return;
        }
        self.dfs(i + 1);
    }
}

/// Exact maximum size of a family of subsets of `[n]` avoiding `k` distinct
/// members with constant pairwise intersections (or unions).
///
/// Phase one finds the optimum with candidates in (popcount, value) order,
/// optionally fixing the smallest member up to symmetry. Phase two sweeps
/// candidates in numeric order to return the lexicographically smallest
/// optimal family.
pub fn max_pattern_free(n: usize, k: usize, pattern: Pattern, config: &SearchConfig) -> Result<CapacityResult> {
    if k < 3 {
        return Err(Error::invalid(format!("k must be at least 3, got {k}")));
    }
    if n > MAX_SEARCH_N {
        return Err(Error::Resource(format!("n = {n} exceeds the search limit {MAX_SEARCH_N}")));
    }
    let start = Instant::now();
    let mut by_layer: Vec<u64> = (0..1u64 << n).collect();
    by_layer.sort_by_key(|&m| (m.count_ones(), m));

    let mut nodes = 0u64;
    let mut exhausted = false;
    let mut best: Vec<u64> = Vec::new();

    if config.root_symmetry {
        for r in 0..=n {
            let first = (1u64 << r) - 1;
            let pos = by_layer.iter().position(|&m| m == first).expect("present");
            let mut s = Search::new(&by_layer, k, pattern, config.refined_bound, config.budget.saturating_sub(nodes));
            s.best = best.clone();
            // everything before `pos` is excluded on this branch
            let newly = s.push(pos);
            s.dfs(pos + 1);
            s.pop(newly);
            nodes += s.nodes;
            exhausted |= s.exhausted;
            if s.best.len() > best.len() {
                best = s.best;
            }
            if exhausted {
                break;
            }
        }
    } else {
        let mut s = Search::new(&by_layer, k, pattern, config.refined_bound, config.budget);
        s.dfs(0);
        nodes += s.nodes;
        exhausted = s.exhausted;
        best = s.best;
    }

    let opt = best.len();
    if !exhausted {
        let numeric: Vec<u64> = (0..1u64 << n).collect();
        let mut s = Search::new(&numeric, k, pattern, config.refined_bound, config.budget.saturating_sub(nodes));
        s.target = Some(opt);
        s.dfs(0);
        nodes += s.nodes;
        if s.done {
            best = s.best;
        }
    }

    Ok(CapacityResult {
        n,
        k,
        f_value: opt,
        witness: SetFamily::new(n, best)?,
        nodes_explored: nodes,
        elapsed: start.elapsed(),
        exact: !exhausted && n <= config.exact_ceiling,
    })
}

pub fn max_sunflower_free(n: usize, k: usize, budget: u64) -> Result<CapacityResult> {
    let config = SearchConfig { budget, ..SearchConfig::default() };
    max_pattern_free(n, k, Pattern::Sunflower, &config)
}

pub fn max_cosunflower_free(n: usize, k: usize, budget: u64) -> Result<CapacityResult> {
    let config = SearchConfig { budget, ..SearchConfig::default() };
    max_pattern_free(n, k, Pattern::Cosunflower, &config)
}

/// `(F_k(n)/(n+1))^{1/n}`: the lower bound on the capacity certified by the
/// tensor power of the witness's largest layer. Valid for lower-bound-only
/// results too, since any sunflower-free family certifies it.
pub fn capacity_lower_estimate(result: &CapacityResult) -> Result<f64> {
    if result.n == 0 {
        return Err(Error::Domain("capacity estimate is undefined for n = 0".into()));
    }
    let n = result.n as f64;
    Ok((result.f_value as f64 / (n + 1.0)).powf(1.0 / n))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsRecord {
    pub k: usize,
    pub lower: f64,
    pub upper: f64,
    pub lower_source: &'static str,
    pub upper_source: &'static str,
}

/// Slice-rank upper bound on the 3-sunflower-free capacity, `3 / 2^{2/3}`.
pub fn three_sunflower_upper() -> f64 {
    3.0 / 2f64.powf(2.0 / 3.0)
}

pub fn known_bounds(k: usize) -> Result<BoundsRecord> {
    if k < 3 {
        return Err(Error::invalid(format!("k must be at least 3, got {k}")));
    }
    Ok(match k {
        3 => BoundsRecord {
            k,
            lower: 1.551,
            upper: three_sunflower_upper(),
            lower_source: "explicit construction",
            upper_source: "slice rank, 3/2^(2/3)",
        },
        _ => BoundsRecord { k, lower: 1.0, upper: 2.0, lower_source: "trivial", upper_source: "trivial" },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::setfam::{find_k_cosunflower, find_k_sunflower};

    /// Every family of 2^[n], keeping the largest sunflower-free one that is
    /// lexicographically smallest.
    fn naive(n: usize, k: usize, pattern: Pattern) -> (usize, Vec<u64>) {
        let cands = 1usize << n;
        let mut best: (usize, Vec<u64>) = (0, vec![]);
        for bits in 0u64..(1u64 << cands) {
            let members: Vec<u64> = (0..cands as u64).filter(|&m| bits >> m & 1 == 1).collect();
            if members.len() < best.0 {
                continue;
            }
            let fam = SetFamily::new(n, members.clone()).unwrap();
            let hit = match pattern {
                Pattern::Sunflower => find_k_sunflower(&fam, k).unwrap(),
                Pattern::Cosunflower => find_k_cosunflower(&fam, k).unwrap(),
            };
            if hit.is_none() && (members.len() > best.0 || members < best.1) {
                best = (members.len(), members);
            }
        }
        best
    }

    #[test]
    fn small_values() {
        let r = max_sunflower_free(0, 3, 1000).unwrap();
        assert_eq!((r.f_value, r.exact), (1, true));
        assert_eq!(max_sunflower_free(1, 3, 1000).unwrap().f_value, 2);
        let r = max_sunflower_free(2, 3, 1000).unwrap();
        assert_eq!(r.f_value, 3);
        // the lexicographically smallest optimum
        assert_eq!(r.witness.members(), &[0b00, 0b01, 0b11]);
        // {1},{2},{1,2} is another optimum
        let alt = SetFamily::new(2, [0b01, 0b10, 0b11]).unwrap();
        assert_eq!(find_k_sunflower(&alt, 3).unwrap(), None);
    }

    #[test]
    fn matches_naive_enumeration() {
        for n in 0..=3 {
            for k in 3..=5 {
                let r = max_sunflower_free(n, k, u64::MAX).unwrap();
                let (v, w) = naive(n, k, Pattern::Sunflower);
                assert_eq!(r.f_value, v, "n={n} k={k}");
                assert_eq!(r.witness.members(), w.as_slice(), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn strategies_agree() {
        for n in 0..=4 {
            let mut values = Vec::new();
            for refined_bound in [false, true] {
                for root_symmetry in [false, true] {
                    let cfg = SearchConfig { refined_bound, root_symmetry, ..Default::default() };
                    let r = max_pattern_free(n, 3, Pattern::Sunflower, &cfg).unwrap();
                    values.push((r.f_value, r.witness.members().to_vec()));
                }
            }
            assert!(values.windows(2).all(|w| w[0] == w[1]), "n={n}: {values:?}");
        }
    }

    #[test]
    fn budget_exhaustion_is_flagged() {
        let r = max_sunflower_free(4, 3, 5).unwrap();
        assert!(!r.exact);
        assert_eq!(find_k_sunflower(&r.witness, 3).unwrap(), None);
        assert_eq!(r.witness.len(), r.f_value);
    }

    #[test]
    fn cosunflower_dual_matches() {
        for n in 0..=4 {
            let s = max_sunflower_free(n, 3, u64::MAX).unwrap();
            let c = max_cosunflower_free(n, 3, u64::MAX).unwrap();
            assert_eq!(s.f_value, c.f_value);
            assert_eq!(find_k_cosunflower(&c.witness, 3).unwrap(), None);
        }
    }

    #[test]
    fn lower_estimates() {
        let r = max_sunflower_free(2, 3, 1000).unwrap();
        assert!((capacity_lower_estimate(&r).unwrap() - 1.0).abs() < 1e-12);
        let r1 = max_sunflower_free(1, 3, 1000).unwrap();
        assert!((capacity_lower_estimate(&r1).unwrap() - 1.0).abs() < 1e-12);
        let r0 = max_sunflower_free(0, 3, 1000).unwrap();
        assert!(capacity_lower_estimate(&r0).is_err());
    }

    #[test]
    fn registry() {
        let b = known_bounds(3).unwrap();
        assert!((b.upper - 1.889881574).abs() < 1e-9);
        assert_eq!(b.lower, 1.551);
        let b4 = known_bounds(4).unwrap();
        assert_eq!((b4.lower, b4.upper), (1.0, 2.0));
        for k in 3..10 {
            let b = known_bounds(k).unwrap();
            assert!(b.lower <= b.upper && b.upper <= 2.0);
        }
        assert!(known_bounds(2).is_err());
    }
}
