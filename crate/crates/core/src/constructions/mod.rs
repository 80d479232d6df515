//! Lower-bound constructions: uniform prime-subset products over greedy
//! buckets, blow-ups of cosunflower-free families over prime blocks, and
//! the product-measure pipeline.

mod blowup;
mod buckets;
mod measure;
mod uniform;

pub use blowup::family_blowup_construction;
pub use buckets::{
    blowup_scale_params, bucket_pool, greedy_buckets, greedy_buckets_partial, subset_scale_params, threshold_from_f64, unit_buckets,
    BlockPartition, IntervalConvention, ScaleParams,
};
pub use measure::{
    harmonic_measure_identity, prime_weights, product_measure, product_measure_f64, tail_harmonic_bound,
    weighted_cosunflower_pipeline, weighted_partition, BlockStats, PipelineReport, TailBound, WeightedGroundSet,
    WeightedPartition,
};
pub use uniform::{esym, esym_f64, exponent_g, ln_factorial, optimal_threshold, subset_exponent, uniform_subset_construction};

use num_rational::BigRational;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::rational::{format_rational, to_f64};

pub const DEFAULT_ELEMENT_CAP: u64 = 1_000_000;
/// Largest materialized set handed to the quadratic freeness check.
pub const DEFAULT_CHECK_LIMIT: usize = 10_000;

/// How much of a construction to write out explicitly.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaterializeOptions {
    pub enumerate: bool,
    pub cap: u64,
    /// Above the cap, keep the first `cap` elements instead of failing.
    pub allow_truncate: bool,
    pub check_limit: usize,
    /// Sample size for constructions that are sampled rather than listed.
    pub samples: usize,
    pub seed: u64,
}

impl Default for MaterializeOptions {
    fn default() -> Self {
        MaterializeOptions {
            enumerate: false,
            cap: DEFAULT_ELEMENT_CAP,
            allow_truncate: false,
            check_limit: DEFAULT_CHECK_LIMIT,
            samples: 0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstructionKind {
    UniformSubset,
    FamilyBlowup,
    Weighted,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstructionParams {
    pub k: usize,
    pub r: Option<usize>,
    pub t: usize,
    #[serde(rename = "B")]
    pub threshold: f64,
    pub delta: f64,
    pub synthetic: bool,
    pub exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl CheckRecord {
    pub fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        CheckRecord { name: name.to_string(), passed, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstructionReport {
    pub kind: ConstructionKind,
    pub params: ConstructionParams,
    pub harmonic_sum: BigRational,
    pub predicted_exponent: Option<f64>,
    pub element_count: u128,
    pub sampled_elements: Option<Vec<u64>>,
    pub truncated: bool,
    pub checks: Vec<CheckRecord>,
}

impl ConstructionReport {
    pub fn all_checks_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn csv_header() -> &'static str {
        "kind,k,r,t,B,delta,harmonic_sum,harmonic_sum_float,predicted_exponent,element_count,truncated,checks_passed"
    }

    pub fn csv_row(&self) -> String {
        let kind = serde_json::to_value(self.kind).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.12}")).unwrap_or_default();
        format!(
            "{},{},{},{},{:.12},{:.12},{},{:.12},{},{},{},{}",
            kind,
            self.params.k,
            self.params.r.map(|r| r.to_string()).unwrap_or_default(),
            self.params.t,
            self.params.threshold,
            self.params.delta,
            format_rational(&self.harmonic_sum),
            to_f64(&self.harmonic_sum),
            opt(self.predicted_exponent),
            self.element_count,
            self.truncated,
            self.all_checks_passed()
        )
    }
}

impl Serialize for ConstructionReport {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ConstructionReport", 9)?;
        st.serialize_field("kind", &self.kind)?;
        st.serialize_field("construction_params", &self.params)?;
        st.serialize_field("harmonic_sum", &format_rational(&self.harmonic_sum))?;
        st.serialize_field("harmonic_sum_float", &to_f64(&self.harmonic_sum))?;
        st.serialize_field("predicted_exponent", &self.predicted_exponent)?;
        st.serialize_field("element_count", &self.element_count.to_string())?;
        st.serialize_field("sampled_elements", &self.sampled_elements)?;
        st.serialize_field("truncated", &self.truncated)?;
        st.serialize_field("freeness_checks", &self.checks)?;
        st.end()
    }
}
