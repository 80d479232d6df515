//! Blow-ups of a family over a block partition, and tensor powers.

use super::{find_k_sunflower, full_mask, mask_elements, SetFamily, MAX_GROUND};
use crate::error::{Error, Result};

/// Hard ceiling on the size of any family produced here.
pub const MAX_PRODUCED: u128 = 20_000_000;

/// Disjoint blocks `U_1, …, U_t` plus a remainder, covering a ground set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Blocks {
    ground_size: usize,
    blocks: Vec<u64>,
    remainder: u64,
}

impl Blocks {
    pub fn new(ground_size: usize, blocks: Vec<u64>, remainder: u64) -> Result<Self> {
        if ground_size > MAX_GROUND {
            return Err(Error::GroundSetOverflow(ground_size));
        }
        let mut seen = 0u64;
        for (i, &b) in blocks.iter().chain(std::iter::once(&remainder)).enumerate() {
            if b & seen != 0 {
                return Err(Error::invalid(format!("block {i} overlaps an earlier block")));
            }
            seen |= b;
        }
        if seen != full_mask(ground_size) {
            return Err(Error::invalid(format!(
                "blocks cover {:?} but the ground set has {ground_size} elements",
                mask_elements(seen)
            )));
        }
        Ok(Blocks { ground_size, blocks, remainder })
    }

    /// Consecutive blocks of the given sizes, then a remainder of `rest`
    /// elements.
    pub fn from_sizes(sizes: &[usize], rest: usize) -> Result<Self> {
        let total: usize = sizes.iter().sum::<usize>() + rest;
        if total > MAX_GROUND {
            return Err(Error::GroundSetOverflow(total));
        }
        let mut offset = 0;
        let mut blocks = Vec::with_capacity(sizes.len());
        for &sz in sizes {
            blocks.push(full_mask(sz) << offset);
            offset += sz;
        }
        let remainder = if rest == 0 { 0 } else { full_mask(rest) << offset };
        Blocks::new(total, blocks, remainder)
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn blocks(&self) -> &[u64] {
        &self.blocks
    }

    pub fn remainder(&self) -> u64 {
        self.remainder
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// All sets meeting `U_i` in exactly one element for `i ∈ F`, missing every
/// other block and the remainder, taken over every `F` in `family`.
pub fn blow_up(family: &SetFamily, blocks: &Blocks) -> Result<SetFamily> {
    if family.ground_size() != blocks.len() {
        return Err(Error::invalid(format!(
            "family lives on {} indices but {} blocks were given",
            family.ground_size(),
            blocks.len()
        )));
    }
    let parts: Vec<Vec<u64>> = blocks
        .blocks()
        .iter()
        .map(|&b| mask_elements(b).into_iter().map(|e| 1u64 << e).collect())
        .collect();

    let mut total: u128 = 0;
    for &f in family.members() {
        let mut n: u128 = 1;
        for i in mask_elements(f) {
            if parts[i].is_empty() {
                return Err(Error::invalid(format!("member {:?} selects empty block {i}", mask_elements(f))));
            }
            n = n.saturating_mul(parts[i].len() as u128);
        }
        total = total.saturating_add(n);
    }
    if total > MAX_PRODUCED {
        return Err(Error::Resource(format!("blow-up would have {total} members")));
    }

    let mut out = Vec::with_capacity(total as usize);
    for &f in family.members() {
        let idx = mask_elements(f);
        let mut acc = vec![0u64];
        for i in idx {
            acc = acc.iter().flat_map(|&p| parts[i].iter().map(move |&e| p | e)).collect();
        }
        out.extend(acc);
    }
    // fibres of distinct members are disjoint, so no duplicates arise
    SetFamily::new(blocks.ground_size(), out)
}

/// Disjoint-union tensor power of the largest uniform layer.
///
/// Picks the layer `r` with the most members (smallest `r` on ties), places
/// `t` relabelled copies on `[t·n]`, and returns all unions taking one
/// member from each copy. The input must be `k`-sunflower-free; the output
/// then is too and has exactly `|layer|^t` members.
pub fn tensor_power(family: &SetFamily, t: usize, k: usize) -> Result<SetFamily> {
    if t == 0 {
        return Err(Error::invalid("tensor power needs t >= 1"));
    }
    let n = family.ground_size();
    let ground = t.checked_mul(n).filter(|&g| g <= MAX_GROUND).ok_or(Error::GroundSetOverflow(t * n))?;
    if let Some(w) = find_k_sunflower(family, k)? {
        return Err(Error::invalid(format!("family contains a {k}-sunflower at member indices {w:?}")));
    }
    let layer = (0..=n as u32)
        .map(|r| family.layer(r))
        .fold(None::<SetFamily>, |best, l| match best {
            Some(b) if b.len() >= l.len() => Some(b),
            _ => Some(l),
        })
        .expect("at least one layer");
    let size = (layer.len() as u128).checked_pow(t as u32).unwrap_or(u128::MAX);
    if size > MAX_PRODUCED {
        return Err(Error::Resource(format!("tensor power would have {size} members")));
    }
    let mut acc = vec![0u64];
    for copy in 0..t {
        let shift = copy * n;
        acc = acc
            .iter()
            .flat_map(|&p| layer.members().iter().map(move |&m| p | (m << shift)))
            .collect();
    }
    SetFamily::new(ground, acc)
}
