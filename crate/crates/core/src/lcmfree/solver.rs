//! Branch-and-bound for `f_k(N)`, the largest harmonic weight of an
//! LCM-k-free subset of `{1, …, N}`.

use std::time::Instant;

use num_integer::Integer;
use num_rational::BigRational;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::{format_rational, sum_reciprocals};

pub const DEFAULT_FK_CEILING: u64 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FkConfig {
    pub budget: u64,
    /// Results for `N` above this are labelled non-exact.
    pub exact_ceiling: u64,
}

impl Default for FkConfig {
    fn default() -> Self {
        FkConfig { budget: 200_000_000, exact_ceiling: DEFAULT_FK_CEILING }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FkResult {
    pub n: u64,
    pub k: usize,
    pub value: BigRational,
    pub optimal_set: Vec<u64>,
    pub nodes: u64,
    pub exact: bool,
    pub elapsed_ms: u128,
}

impl Serialize for FkResult {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("FkResult", 6)?;
        st.serialize_field("N", &self.n)?;
        st.serialize_field("k", &self.k)?;
        st.serialize_field("value", &format_rational(&self.value))?;
        st.serialize_field("set", &self.optimal_set)?;
        st.serialize_field("exact", &self.exact)?;
        st.serialize_field("nodes", &self.nodes)?;
        st.end()
    }
}

struct Solver {
    k: usize,
    /// weights[i] = L / (i+1) with L = lcm(1..N): exact integer weights
    weights: Vec<u128>,
    /// pair_lcm[i][j] for elements i+1, j+1
    pair_lcm: Vec<Vec<u64>>,
    chosen: Vec<usize>,
    weight: u128,
    blocked: Vec<u32>,
    best: Vec<usize>,
    best_weight: u128,
    nodes: u64,
    budget: u64,
    exhausted: bool,
}

impl Solver {
    fn lcm_idx(&self, a: usize, b: usize) -> u64 {
        self.pair_lcm[a][b]
    }

    /// Does element `d` complete an LCM-k-tuple with `c` and k−2 chosen?
    fn completes(&self, c: usize, d: usize) -> bool {
        let m = self.lcm_idx(c, d);
        let pool: Vec<usize> = self
            .chosen
            .iter()
            .copied()
            .filter(|&x| self.lcm_idx(x, c) == m && self.lcm_idx(x, d) == m)
            .collect();
        if pool.len() < self.k - 2 {
            return false;
        }
        self.clique(&pool, 0, self.k - 2, m, &mut Vec::new())
    }

    fn clique(&self, pool: &[usize], from: usize, size: usize, m: u64, cur: &mut Vec<usize>) -> bool {
        if cur.len() == size {
            return true;
        }
        for i in from..pool.len() {
            if pool.len() - i < size - cur.len() {
                return false;
            }
            if cur.iter().all(|&x| self.lcm_idx(x, pool[i]) == m) {
                cur.push(pool[i]);
                if self.clique(pool, i + 1, size, m, cur) {
                    return true;
                }
                cur.pop();
            }
        }
        false
    }

    fn dfs(&mut self, pos: usize) {
        if self.exhausted {
            return;
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            self.exhausted = true;
            return;
        }
        if self.weight > self.best_weight {
            self.best_weight = self.weight;
            self.best = self.chosen.clone();
        }
        let n = self.weights.len();
        let rest: u128 = (pos..n).filter(|&i| self.blocked[i] == 0).map(|i| self.weights[i]).sum();
        // ties never replace the incumbent, which keeps the first optimum
        // found (the lexicographically smallest one)
        if self.weight + rest <= self.best_weight {
            return;
        }
        let Some(i) = (pos..n).find(|&i| self.blocked[i] == 0) else {
            return;
        };

        let newly: Vec<usize> = (i + 1..n).filter(|&j| self.blocked[j] == 0 && self.completes(i, j)).collect();
        for &j in &newly {
            self.blocked[j] += 1;
        }
        self.chosen.push(i);
        self.weight += self.weights[i];
        self.dfs(i + 1);
        self.weight -= self.weights[i];
        self.chosen.pop();
        for &j in &newly {
            self.blocked[j] -= 1;
        }

        self.dfs(i + 1);
    }
}

/// `lcm(1, …, n)` if it fits in `u128`.
fn lcm_upto(n: u64) -> Option<u128> {
    let mut l: u128 = 1;
    for i in 1..=n as u128 {
        l = (l / l.gcd(&i)).checked_mul(i)?;
    }
    Some(l)
}

pub fn exact_fk(n: u64, k: usize, budget: u64) -> Result<FkResult> {
    exact_fk_with(n, k, &FkConfig { budget, ..FkConfig::default() })
}

/// Exact maximum of `Σ 1/a` over LCM-k-free `A ⊆ {1, …, n}`.
///
/// Elements are decided in ascending order (largest reciprocal first),
/// including before excluding. The bound adds the weights of the remaining
/// elements that can still join the chosen set; elements that would
/// complete a tuple are blocked as soon as that becomes true. Weights are
/// the integers `lcm(1..n)/a`, so every comparison is exact.
pub fn exact_fk_with(n: u64, k: usize, config: &FkConfig) -> Result<FkResult> {
    if k < 3 {
        return Err(Error::invalid(format!("k must be at least 3, got {k}")));
    }
    let scale = lcm_upto(n).ok_or_else(|| Error::Resource(format!("lcm(1..{n}) overflows 128 bits")))?;
    let start = Instant::now();
    let size = n as usize;
    let pair_lcm: Vec<Vec<u64>> = (1..=n)
        .map(|a| (1..=n).map(|b| a.lcm(&b)).collect())
        .collect();
    let mut solver = Solver {
        k,
        weights: (1..=n).map(|a| scale / a as u128).collect(),
        pair_lcm,
        chosen: Vec::with_capacity(size),
        weight: 0,
        blocked: vec![0; size],
        best: Vec::new(),
        best_weight: 0,
        nodes: 0,
        budget: config.budget,
        exhausted: false,
    };
    solver.dfs(0);
    let set: Vec<u64> = solver.best.iter().map(|&i| i as u64 + 1).collect();
    Ok(FkResult {
        n,
        k,
        value: sum_reciprocals(&set),
        optimal_set: set,
        nodes: solver.nodes,
        exact: !solver.exhausted && n <= config.exact_ceiling,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn small_values() {
        let r = exact_fk(1, 3, u64::MAX).unwrap();
        assert_eq!((r.value.clone(), r.optimal_set.clone()), (q(1, 1), vec![1]));
        let r = exact_fk(2, 3, u64::MAX).unwrap();
        assert_eq!((r.value.clone(), r.optimal_set.clone()), (q(3, 2), vec![1, 2]));
        let r = exact_fk(4, 3, u64::MAX).unwrap();
        assert_eq!((r.value.clone(), r.optimal_set.clone()), (q(25, 12), vec![1, 2, 3, 4]));
        assert_eq!(exact_fk(2, 5, u64::MAX).unwrap().value, q(3, 2));
        assert!(exact_fk(0, 3, 10).unwrap().value.is_zero());
    }

    #[test]
    fn monotone_and_bounded() {
        let mut prev = BigRational::zero();
        for n in 1..=24 {
            let r3 = exact_fk(n, 3, u64::MAX).unwrap();
            let r4 = exact_fk(n, 4, u64::MAX).unwrap();
            assert!(r3.value >= prev);
            assert!(r4.value >= r3.value);
            let h: Vec<u64> = (1..=n).collect();
            assert!(r4.value <= sum_reciprocals(&h));
            prev = r3.value;
        }
    }

    /// Every subset of {1..n}; best value, ties broken by the
    /// lexicographically smallest sorted element list.
    fn naive(n: u64, k: usize) -> (BigRational, Vec<u64>) {
        let mut best = (BigRational::zero(), Vec::new());
        for mask in 0u32..(1 << n) {
            let set: Vec<u64> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            let inst = crate::lcmfree::LcmInstance::new(set.clone()).unwrap();
            if crate::lcmfree::find_lcm_k_tuple_naive(&inst, k).unwrap().is_some() {
                continue;
            }
            let v = sum_reciprocals(&set);
            if v > best.0 || (v == best.0 && set < best.1) {
                best = (v, set);
            }
        }
        best
    }

    #[test]
    fn agrees_with_subset_enumeration() {
        for n in 1..=12 {
            let r = exact_fk(n, 3, u64::MAX).unwrap();
            assert_eq!((r.value, r.optimal_set), naive(n, 3), "n={n}");
        }
        for n in 1..=9 {
            let r = exact_fk(n, 4, u64::MAX).unwrap();
            assert_eq!((r.value, r.optimal_set), naive(n, 4), "n={n}");
        }
    }

    #[test]
    fn budget_and_ceiling() {
        let r = exact_fk(30, 3, 10).unwrap();
        assert!(!r.exact);
        let r = exact_fk_with(12, 3, &FkConfig { budget: u64::MAX, exact_ceiling: 10 }).unwrap();
        assert!(!r.exact);
        assert!(matches!(exact_fk(200, 3, 10), Err(Error::Resource(_))));
    }
}
