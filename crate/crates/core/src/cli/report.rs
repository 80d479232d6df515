//! Config-driven experiment runner. Each experiment writes one table; a
//! `summary.json` lists what ran. Output depends only on the config.

use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::cache::omega_sieve;
use crate::capacity::{max_pattern_free, SearchConfig};
use crate::constructions::{
    bucket_pool, exponent_g, greedy_buckets, greedy_buckets_partial, optimal_threshold, subset_exponent,
    threshold_from_f64, uniform_subset_construction, ConstructionReport, IntervalConvention, MaterializeOptions,
};
use crate::error::{Error, Result};
use crate::harmonic::{a_ell, euler_majorant, g_constant_with, h_ell_trend, sathe_selberg_main_term, z_omega_sum};
use crate::lcmfree::{exact_fk_with, FkConfig};
use crate::primes::PrimeTable;
use crate::rational::format_rational;
use crate::setfam::{blow_up, find_k_cosunflower, Blocks, Pattern, SetFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrendParams {
    pub bounds: Vec<u64>,
    pub ells: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepParams {
    pub ks: Vec<usize>,
    pub b_min: f64,
    pub b_max: f64,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FkTableParams {
    pub n_max: u64,
    pub k: usize,
    pub budget: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityParams {
    pub n_max: usize,
    pub ks: Vec<usize>,
    pub budget: Option<u64>,
    #[serde(default)]
    pub co: bool,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlowupParams {
    pub trials: usize,
    pub max_ground: usize,
    pub k: usize,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZOmegaParams {
    pub xs: Vec<u64>,
    pub zs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GParams {
    pub zs: Vec<f64>,
    pub cutoff: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CountParams {
    pub xs: Vec<u64>,
    pub ells: Vec<u32>,
    pub cutoff: u64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformParams {
    pub k: usize,
    pub prime_min: u64,
    pub prime_max: u64,
    /// Omitted means the exponent-optimal threshold.
    pub threshold: Option<f64>,
    pub blocks: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentParams {
    HEllTrend(TrendParams),
    ExponentSweep(SweepParams),
    FkTable(FkTableParams),
    CapacityTable(CapacityParams),
    BlowupSweep(BlowupParams),
    ZOmega(ZOmegaParams),
    GConstant(GParams),
    AlmostPrimeCount(CountParams),
    UniformSubset(UniformParams),
}

impl ExperimentParams {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentParams::HEllTrend(_) => "h-ell-trend",
            ExperimentParams::ExponentSweep(_) => "exponent-sweep",
            ExperimentParams::FkTable(_) => "fk-table",
            ExperimentParams::CapacityTable(_) => "capacity-table",
            ExperimentParams::BlowupSweep(_) => "blowup-sweep",
            ExperimentParams::ZOmega(_) => "z-omega",
            ExperimentParams::GConstant(_) => "g-constant",
            ExperimentParams::AlmostPrimeCount(_) => "almost-prime-count",
            ExperimentParams::UniformSubset(_) => "uniform-subset",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub format: OutputFormat,
    pub seed: u64,
    pub params: ExperimentParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportConfig {
    pub seed: u64,
    pub output: Option<String>,
    pub experiments: Vec<ExperimentConfig>,
}

fn fnv1a(s: &str) -> u64 {
    s.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

fn take<T: serde::de::DeserializeOwned>(table: &mut toml::Table, key: &str, ctx: &str) -> Result<Option<T>> {
    table
        .remove(key)
        .map(|v| v.try_into::<T>().map_err(|e| Error::Parse(format!("{ctx}: `{key}`: {e}"))))
        .transpose()
}

impl ReportConfig {
    /// Parses and validates a config. Unknown keys are rejected at every
    /// level.
    pub fn parse(text: &str) -> Result<Self> {
        let mut root: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::Parse(e.to_string()))?;
        let seed = take::<u64>(&mut root, "seed", "config")?.unwrap_or(0);
        let output = take::<String>(&mut root, "output", "config")?;
        let raw = take::<Vec<toml::Table>>(&mut root, "experiments", "config")?
            .ok_or_else(|| Error::Parse("config: missing `experiments`".into()))?;
        if let Some(key) = root.keys().next() {
            return Err(Error::Parse(format!("config: unknown key `{key}`")));
        }
        let mut experiments = Vec::new();
        for (i, mut t) in raw.into_iter().enumerate() {
            let ctx = format!("experiments[{i}]");
            let name = take::<String>(&mut t, "name", &ctx)?.ok_or_else(|| Error::Parse(format!("{ctx}: missing `name`")))?;
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::Parse(format!("{ctx}: name {name:?} must be non-empty [A-Za-z0-9_-]")));
            }
            if experiments.iter().any(|e: &ExperimentConfig| e.name == name) {
                return Err(Error::Parse(format!("{ctx}: duplicate name {name:?}")));
            }
            let kind = take::<String>(&mut t, "kind", &ctx)?.ok_or_else(|| Error::Parse(format!("{ctx}: missing `kind`")))?;
            let format = take::<OutputFormat>(&mut t, "format", &ctx)?.unwrap_or_default();
            let seed_i = take::<u64>(&mut t, "seed", &ctx)?.unwrap_or_else(|| seed ^ fnv1a(&name));
            let value = toml::Value::Table(t);
            let p = |e: toml::de::Error| Error::Parse(format!("{ctx}: {e}"));
            let params = match kind.as_str() {
                "h-ell-trend" => ExperimentParams::HEllTrend(value.try_into().map_err(p)?),
                "exponent-sweep" => ExperimentParams::ExponentSweep(value.try_into().map_err(p)?),
                "fk-table" => ExperimentParams::FkTable(value.try_into().map_err(p)?),
                "capacity-table" => ExperimentParams::CapacityTable(value.try_into().map_err(p)?),
                "blowup-sweep" => ExperimentParams::BlowupSweep(value.try_into().map_err(p)?),
                "z-omega" => ExperimentParams::ZOmega(value.try_into().map_err(p)?),
                "g-constant" => ExperimentParams::GConstant(value.try_into().map_err(p)?),
                "almost-prime-count" => ExperimentParams::AlmostPrimeCount(value.try_into().map_err(p)?),
                "uniform-subset" => ExperimentParams::UniformSubset(value.try_into().map_err(p)?),
                other => return Err(Error::Parse(format!("{ctx}: unknown kind {other:?}"))),
            };
            experiments.push(ExperimentConfig { name, format, seed: seed_i, params });
        }
        Ok(ReportConfig { seed, output, experiments })
    }
}

/// A table of JSON cells; CSV renders strings bare and everything else as
/// its JSON text.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Self {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|v| match v {
                    Value::String(x) => x.clone(),
                    Value::Null => String::new(),
                    other => other.to_string(),
                })
                .collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| Value::Object(self.header.iter().map(|h| h.to_string()).zip(r.iter().cloned()).collect()))
            .collect();
        let mut s = serde_json::to_string_pretty(&rows).expect("serializable");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentOutcome {
    pub name: String,
    pub kind: &'static str,
    pub status: &'static str,
    pub file: Option<String>,
    pub rows: usize,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportSummary {
    pub seed: u64,
    pub experiments: Vec<ExperimentOutcome>,
}

impl ReportSummary {
    pub fn all_ok(&self) -> bool {
        self.experiments.iter().all(|e| e.status == "ok")
    }
}

/// Runs every experiment, `jobs` at a time, and writes one file per
/// experiment plus `summary.json` into `dir`. A failing experiment is
/// recorded in the summary and does not stop the others.
pub fn run_report(config: &ReportConfig, dir: &Path, jobs: usize) -> Result<ReportSummary> {
    std::fs::create_dir_all(dir)?;
    let n = config.experiments.len();
    let results: Mutex<Vec<Option<Result<Table>>>> = Mutex::new(vec![None; n]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, n.max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= n {
                    break;
                }
                let r = run_experiment(&config.experiments[i]);
                results.lock().expect("no poisoning")[i] = Some(r);
            });
        }
    });
    let results = results.into_inner().expect("no poisoning");
    let mut outcomes = Vec::with_capacity(n);
    for (exp, r) in config.experiments.iter().zip(results) {
        let r = r.expect("every experiment ran");
        let outcome = match r {
            Ok(table) => {
                let file = format!("{}.{}", exp.name, exp.format.extension());
                let text = match exp.format {
                    OutputFormat::Csv => table.to_csv(),
                    OutputFormat::Json => table.to_json(),
                };
                std::fs::write(dir.join(&file), text)?;
                ExperimentOutcome { name: exp.name.clone(), kind: exp.params.kind(), status: "ok", file: Some(file), rows: table.rows.len(), error: None }
            }
            Err(e) => ExperimentOutcome {
                name: exp.name.clone(),
                kind: exp.params.kind(),
                status: "error",
                file: None,
                rows: 0,
                error: Some(e.to_string()),
            },
        };
        outcomes.push(outcome);
    }
    let summary = ReportSummary { seed: config.seed, experiments: outcomes };
    let mut text = serde_json::to_string_pretty(&summary)?;
    text.push('\n');
    std::fs::write(dir.join("summary.json"), text)?;
    Ok(summary)
}

pub fn run_experiment(exp: &ExperimentConfig) -> Result<Table> {
    match &exp.params {
        ExperimentParams::HEllTrend(p) => h_trend(p),
        ExperimentParams::ExponentSweep(p) => exponent_sweep(p),
        ExperimentParams::FkTable(p) => fk_table(p),
        ExperimentParams::CapacityTable(p) => capacity_table(p),
        ExperimentParams::BlowupSweep(p) => blowup_sweep(p, exp.seed),
        ExperimentParams::ZOmega(p) => z_omega(p),
        ExperimentParams::GConstant(p) => g_table(p),
        ExperimentParams::AlmostPrimeCount(p) => count_table(p),
        ExperimentParams::UniformSubset(p) => uniform(p),
    }
}

fn h_trend(p: &TrendParams) -> Result<Table> {
    let max = p.bounds.iter().copied().max().ok_or_else(|| Error::invalid("no bounds"))?;
    let sieve = omega_sieve(max)?;
    let mut t = Table::new(&["N", "ell", "exact", "H_float", "scale", "ratio"]);
    for r in h_ell_trend(&sieve, &p.bounds, &p.ells)? {
        t.push(vec![json!(r.n), json!(r.ell), json!(r.exact), json!(r.value), json!(r.scale), json!(r.ratio)]);
    }
    Ok(t)
}

fn exponent_sweep(p: &SweepParams) -> Result<Table> {
    if p.steps < 2 || !(p.b_min > 0.0) || !(p.b_max > p.b_min) {
        return Err(Error::invalid("sweep needs steps >= 2 and 0 < b_min < b_max"));
    }
    let mut t = Table::new(&["k", "B", "g", "B_opt", "c_k"]);
    for &k in &p.ks {
        let (b_opt, ck) = (optimal_threshold(k)?, subset_exponent(k)?);
        for i in 0..p.steps {
            let b = p.b_min + (p.b_max - p.b_min) * i as f64 / (p.steps - 1) as f64;
            t.push(vec![json!(k), json!(b), json!(exponent_g(k - 2, b)), json!(b_opt), json!(ck)]);
        }
    }
    Ok(t)
}

fn fk_table(p: &FkTableParams) -> Result<Table> {
    let config = FkConfig { budget: p.budget.unwrap_or(FkConfig::default().budget), ..FkConfig::default() };
    let mut t = Table::new(&["N", "k", "value", "value_float", "exact", "set"]);
    for n in 1..=p.n_max {
        let r = exact_fk_with(n, p.k, &config)?;
        let set: Vec<String> = r.optimal_set.iter().map(u64::to_string).collect();
        t.push(vec![
            json!(n),
            json!(p.k),
            json!(format_rational(&r.value)),
            json!(crate::rational::to_f64(&r.value)),
            json!(r.exact),
            json!(set.join(" ")),
        ]);
    }
    Ok(t)
}

fn capacity_table(p: &CapacityParams) -> Result<Table> {
    let config = SearchConfig { budget: p.budget.unwrap_or(SearchConfig::default().budget), ..SearchConfig::default() };
    let pattern = if p.co { Pattern::Cosunflower } else { Pattern::Sunflower };
    let mut t = Table::new(&["n", "k", "F", "exact", "capacity_lower"]);
    for &k in &p.ks {
        for n in 1..=p.n_max {
            let r = max_pattern_free(n, k, pattern, &config)?;
            let est = crate::capacity::capacity_lower_estimate(&r)?;
            t.push(vec![json!(n), json!(k), json!(r.f_value), json!(r.exact), json!(est)]);
        }
    }
    Ok(t)
}

/// Random k-cosunflower-free family on `[n]`: members are offered in a
/// random order and kept when they create no cosunflower.
pub fn random_cosunflower_free(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Result<SetFamily> {
    let mut masks: Vec<u64> = (0..1u64 << n).collect();
    for i in (1..masks.len()).rev() {
        masks.swap(i, rng.gen_range(0..=i));
    }
    let keep = rng.gen_range(1..=masks.len());
    let mut fam = SetFamily::new(n, [])?;
    for &m in &masks[..keep] {
        let mut with: Vec<u64> = fam.members().to_vec();
        with.push(m);
        let cand = SetFamily::new(n, with)?;
        if find_k_cosunflower(&cand, k)?.is_none() {
            fam = cand;
        }
    }
    Ok(fam)
}

fn blowup_sweep(p: &BlowupParams, seed: u64) -> Result<Table> {
    if p.max_ground < 1 || p.max_ground > 20 {
        return Err(Error::invalid("max_ground must be in 1..=20"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Table::new(&["trial", "t", "base_size", "block_sizes", "ground", "blowup_size", "free"]);
    for trial in 0..p.trials {
        let nb = rng.gen_range(1..=p.max_ground.min(4));
        let base = random_cosunflower_free(&mut rng, nb, p.k)?;
        let mut sizes = Vec::with_capacity(nb);
        let mut room = p.max_ground - nb;
        for _ in 0..nb {
            let extra = rng.gen_range(0..=room.min(2));
            room -= extra;
            sizes.push(1 + extra);
        }
        let rest = rng.gen_range(0..=room);
        let blocks = Blocks::from_sizes(&sizes, rest)?;
        let fam = blow_up(&base, &blocks)?;
        let free = find_k_cosunflower(&fam, p.k)?.is_none();
        let sizes_s: Vec<String> = sizes.iter().map(usize::to_string).collect();
        t.push(vec![
            json!(trial),
            json!(nb),
            json!(base.len()),
            json!(sizes_s.join("-")),
            json!(blocks.ground_size()),
            json!(fam.len()),
            json!(free),
        ]);
    }
    Ok(t)
}

fn z_omega(p: &ZOmegaParams) -> Result<Table> {
    let max = p.xs.iter().copied().max().ok_or_else(|| Error::invalid("no xs"))?;
    let sieve = omega_sieve(max)?;
    let table = PrimeTable::new(max)?;
    let mut t = Table::new(&["X", "z", "sum", "majorant", "holds"]);
    for &x in &p.xs {
        for &z in &p.zs {
            let s = z_omega_sum(&sieve, x, z)?.value;
            let m = euler_majorant(&table, x, z)?.value;
            t.push(vec![json!(x), json!(z), json!(s), json!(m), json!(s <= m)]);
        }
    }
    Ok(t)
}

fn g_table(p: &GParams) -> Result<Table> {
    let table = PrimeTable::new(p.cutoff)?;
    let mut t = Table::new(&["z", "cutoff", "G", "tail_bound"]);
    for &z in &p.zs {
        let g = g_constant_with(&table, z)?;
        t.push(vec![json!(z), json!(p.cutoff), json!(g.value), json!(g.tail_bound)]);
    }
    Ok(t)
}

fn count_table(p: &CountParams) -> Result<Table> {
    let max = p.xs.iter().copied().max().ok_or_else(|| Error::invalid("no xs"))?;
    let sieve = omega_sieve(max)?;
    let table = PrimeTable::new(p.cutoff)?;
    let mut t = Table::new(&["x", "ell", "count", "main_term", "ratio"]);
    for &x in &p.xs {
        for &ell in &p.ells {
            let count = a_ell(&sieve, x, ell)?;
            let main = sathe_selberg_main_term(x, ell, &table)?;
            t.push(vec![json!(x), json!(ell), json!(count), json!(main), json!(count as f64 / main)]);
        }
    }
    Ok(t)
}

fn uniform(p: &UniformParams) -> Result<Table> {
    let b = match p.threshold {
        Some(b) => threshold_from_f64(b)?,
        None => threshold_from_f64(optimal_threshold(p.k)?)?,
    };
    let table = PrimeTable::new(p.prime_max)?;
    let pool = bucket_pool(&table, p.prime_min as f64, p.prime_max as f64, IntervalConvention::Closed)?;
    let part = match p.blocks {
        Some(n) => greedy_buckets(&pool, &b, Some(n))?,
        None => greedy_buckets_partial(&pool, &b)?,
    };
    let rep = uniform_subset_construction(p.k, &part, &MaterializeOptions::default())?;
    let mut t = Table::new(&[
        "kind",
        "k",
        "r",
        "t",
        "B",
        "delta",
        "harmonic_sum",
        "harmonic_sum_float",
        "predicted_exponent",
        "element_count",
        "truncated",
        "checks_passed",
    ]);
    debug_assert_eq!(ConstructionReport::csv_header().split(',').count(), t.header.len());
    t.push(
        rep.csv_row()
            .split(',')
            .map(|c| Value::String(c.to_string()))
            .collect(),
    );
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CONFIG: &str = r#"
seed = 3
[[experiments]]
name = "trend"
kind = "h-ell-trend"
bounds = [1000, 10000]
ells = [1, 2]

[[experiments]]
name = "sweep"
kind = "exponent-sweep"
ks = [3, 4]
b_min = 1.0
b_max = 5.0
steps = 5
format = "json"

[[experiments]]
name = "blowups"
kind = "blowup-sweep"
trials = 20
max_ground = 8
k = 3
"#;

    #[test]
    fn parse_and_reject() {
        let c = ReportConfig::parse(CONFIG).unwrap();
        assert_eq!(c.experiments.len(), 3);
        assert_eq!(c.experiments[1].format, OutputFormat::Json);
        assert!(ReportConfig::parse("seed = 1\nbogus = 2\nexperiments = []").is_err());
        let bad = CONFIG.replace("steps = 5", "steps = 5\nextra = 1");
        assert!(ReportConfig::parse(&bad).unwrap_err().to_string().contains("extra"));
        assert!(ReportConfig::parse(&CONFIG.replace("\"sweep\"", "\"trend\"")).is_err());
        assert!(ReportConfig::parse(&CONFIG.replace("exponent-sweep", "nope")).is_err());
    }

    #[test]
    fn bundle_is_deterministic() {
        let c = ReportConfig::parse(CONFIG).unwrap();
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let sa = run_report(&c, a.path(), 1).unwrap();
        let sb = run_report(&c, b.path(), 3).unwrap();
        assert_eq!(sa, sb);
        assert!(sa.all_ok());
        for f in ["trend.csv", "sweep.json", "blowups.csv", "summary.json"] {
            assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap(), "{f}");
        }
        let blowups = std::fs::read_to_string(a.path().join("blowups.csv")).unwrap();
        assert!(blowups.lines().skip(1).all(|l| l.ends_with(",true")));
    }

    #[test]
    fn failures_are_recorded() {
        let cfg = "[[experiments]]\nname = \"bad\"\nkind = \"fk-table\"\nn_max = 5\nk = 2\n";
        let c = ReportConfig::parse(cfg).unwrap();
        let d = tempfile::tempdir().unwrap();
        let s = run_report(&c, d.path(), 1).unwrap();
        assert!(!s.all_ok());
        assert!(s.experiments[0].error.is_some());
    }
}
