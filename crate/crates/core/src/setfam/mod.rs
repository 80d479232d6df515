//! Set families over ground sets of at most 64 elements.
//!
//! Members are bitmasks; bit `i` stands for element `i` of the ground set.
//! Families are kept sorted ascending as unsigned integers so that witness
//! indices are deterministic.

mod blowup;
mod search;

pub use blowup::{blow_up, tensor_power, Blocks};
pub use search::{
    find_k_cosunflower, find_k_cosunflower_direct, find_k_sunflower, find_k_sunflower_enumerate,
    find_k_sunflower_grouped, find_pattern, is_cosunflower, is_sunflower, pairwise_intersections_equal,
    pairwise_unions_equal, zero_or_many_check, Pattern,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_GROUND: usize = 64;

/// Mask with the low `n` bits set.
pub fn full_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Element indices of a mask, ascending.
pub fn mask_elements(mask: u64) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SetFamily {
    ground_size: usize,
    labels: Option<Vec<String>>,
    members: Vec<u64>,
}

impl SetFamily {
    /// Builds a family, sorting members. Duplicates and out-of-range bits are
    /// rejected.
    pub fn new(ground_size: usize, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        if ground_size > MAX_GROUND {
            return Err(Error::GroundSetOverflow(ground_size));
        }
        let universe = full_mask(ground_size);
        let mut members: Vec<u64> = members.into_iter().collect();
        if let Some(bad) = members.iter().find(|&&m| m & !universe != 0) {
            return Err(Error::invalid(format!(
                "member {bad:#b} uses elements outside a ground set of size {ground_size}"
            )));
        }
        members.sort_unstable();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::invalid(format!("duplicate member {:?}", mask_elements(w[0]))));
        }
        Ok(SetFamily { ground_size, labels: None, members })
    }

    /// Like [`SetFamily::new`] but silently drops repeated members.
    pub fn from_masks_dedup(ground_size: usize, members: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut v: Vec<u64> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Self::new(ground_size, v)
    }

    pub fn from_element_lists(ground_size: usize, lists: &[Vec<usize>]) -> Result<Self> {
        let mut masks = Vec::with_capacity(lists.len());
        for (i, list) in lists.iter().enumerate() {
            let mut mask = 0u64;
            for &e in list {
                if e >= ground_size {
                    return Err(Error::invalid(format!(
                        "members[{i}]: element {e} is outside the ground set 0..{ground_size}"
                    )));
                }
                if mask >> e & 1 == 1 {
                    return Err(Error::invalid(format!("members[{i}]: element {e} repeated")));
                }
                mask |= 1 << e;
            }
            masks.push(mask);
        }
        Self::new(ground_size, masks)
    }

    /// Every subset of the ground set.
    pub fn power_set(ground_size: usize) -> Result<Self> {
        if ground_size > 24 {
            return Err(Error::Resource(format!("power set of a {ground_size}-element ground set")));
        }
        Self::new(ground_size, 0..(1u64 << ground_size))
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.ground_size {
            return Err(Error::invalid(format!(
                "{} labels supplied for a ground set of size {}",
                labels.len(),
                self.ground_size
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn members(&self) -> &[u64] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, mask: u64) -> bool {
        self.members.binary_search(&mask).is_ok()
    }

    pub fn universe(&self) -> u64 {
        full_mask(self.ground_size)
    }

    pub fn element_lists(&self) -> Vec<Vec<usize>> {
        self.members.iter().map(|&m| mask_elements(m)).collect()
    }

    /// Members of cardinality `r`.
    pub fn layer(&self, r: u32) -> SetFamily {
        SetFamily {
            ground_size: self.ground_size,
            labels: self.labels.clone(),
            members: self.members.iter().copied().filter(|m| m.count_ones() == r).collect(),
        }
    }

    /// Replaces every member by its complement in the ground set.
    pub fn complement(&self) -> SetFamily {
        let u = self.universe();
        let mut members: Vec<u64> = self.members.iter().map(|&m| u & !m).collect();
        members.sort_unstable();
        SetFamily { ground_size: self.ground_size, labels: self.labels.clone(), members }
    }

    pub fn to_json(&self) -> FamilyJson {
        FamilyJson {
            ground_size: self.ground_size,
            labels: self.labels.clone(),
            members: self.element_lists(),
        }
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("family serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: FamilyJson = serde_json::from_str(s)?;
        raw.try_into()
    }
}

pub fn complement_family(family: &SetFamily) -> SetFamily {
    family.complement()
}

/// Portable JSON form: members are sorted element lists, not raw masks.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyJson {
    pub ground_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub members: Vec<Vec<usize>>,
}

impl TryFrom<FamilyJson> for SetFamily {
    type Error = Error;

    fn try_from(raw: FamilyJson) -> Result<Self> {
        let fam = SetFamily::from_element_lists(raw.ground_size, &raw.members)?;
        match raw.labels {
            Some(labels) => fam.with_labels(labels),
            None => Ok(fam),
        }
    }
}

impl Serialize for SetFamily {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetFamily {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = FamilyJson::deserialize(d)?;
        SetFamily::try_from(raw).map_err(serde::de::Error::custom)
    }
}
