//! Command-line front end. `run` parses arguments, dispatches, prints JSON
//! to `out` and returns the process exit code.

mod cache;
mod report;

pub use cache::{omega_sieve, CACHE_ENV};
pub use report::{run_report, ExperimentConfig, ExperimentParams, OutputFormat, ReportConfig, ReportSummary};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use serde::Serialize;

use crate::capacity::{known_bounds, max_pattern_free, SearchConfig};
use crate::constructions::{
    bucket_pool, family_blowup_construction, greedy_buckets, greedy_buckets_partial, harmonic_measure_identity,
    optimal_threshold, threshold_from_f64, uniform_subset_construction, unit_buckets, weighted_cosunflower_pipeline,
    ConstructionReport, IntervalConvention, MaterializeOptions, WeightedGroundSet, DEFAULT_ELEMENT_CAP,
};
use crate::error::Error;
use crate::harmonic::{a_ell, euler_majorant, g_constant_with, h_ell, sathe_selberg_main_term, z_omega_sum, EXACT_SUM_LIMIT};
use crate::lcmfree::{exact_fk_with, find_lcm_k_tuple, parse_instance, support_family, FkConfig, LcmInstance};
use crate::primes::{PrimeTable, SumMode};
use crate::rational::{format_rational, parse_rational};
use crate::setfam::{find_k_cosunflower, find_k_sunflower, SetFamily};

pub const EXIT_OK: i32 = 0;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_USAGE, message: msg.into() }
    }

    fn data(msg: impl Into<String>) -> Self {
        CliError { code: EXIT_DATA, message: msg.into() }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } | Error::Parse(_) | Error::Io(_) => EXIT_DATA,
            _ => EXIT_USAGE,
        };
        CliError { code, message: e.to_string() }
    }
}

type CliResult<T = i32> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "lcmsf", version, about = "LCM-free sets, sunflower-free families and prime harmonic sums")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Exact f_k(N): the largest harmonic sum of an LCM-k-free subset of [N]
    FkExact {
        #[arg(long = "N")]
        n: u64,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = FkConfig::default().budget)]
        budget: u64,
    },
    /// Exact F_k(n): the largest k-sunflower-free family on n points
    Capacity {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = SearchConfig::default().budget)]
        budget: u64,
        /// Forbid cosunflowers instead of sunflowers
        #[arg(long)]
        co: bool,
    },
    /// Search a family file for a k-sunflower (or k-cosunflower)
    SunflowerCheck {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        co: bool,
    },
    /// Search a list of integers for an LCM-k-tuple
    LcmCheck {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        k: usize,
    },
    /// Write the prime-support family of a squarefree integer list
    Supports {
        #[arg(long)]
        input: PathBuf,
    },
    /// Known lower and upper bounds on the sunflower-free capacity
    Bounds {
        #[arg(long)]
        k: usize,
    },
    /// Lower-bound constructions
    #[command(subcommand)]
    Construct(ConstructCommand),
    /// Sums over squarefree almost primes and related constants
    #[command(subcommand)]
    Harmonic(HarmonicCommand),
    /// Run the experiments listed in a TOML config and write a bundle
    Report {
        config: PathBuf,
        /// Output directory; overrides the config's `output`
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Debug, Args)]
struct Materialize {
    /// List the elements of the constructed set
    #[arg(long)]
    emit_elements: bool,
    /// Keep the first `cap` elements instead of failing when over the cap
    #[arg(long)]
    allow_truncate: bool,
    #[arg(long, default_value_t = DEFAULT_ELEMENT_CAP)]
    cap: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Interval {
    Closed,
    HalfOpen,
}

#[derive(Debug, Subcommand)]
enum ConstructCommand {
    /// Products of k−2 primes from each greedy bucket
    UniformSubset {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        prime_limit: u64,
        #[arg(long, default_value_t = 2)]
        prime_min: u64,
        /// Bucket threshold, or `auto` for the exponent-optimal value
        #[arg(long = "B", default_value = "auto")]
        threshold: String,
        /// Required number of blocks
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long, value_enum, default_value = "closed")]
        interval: Interval,
        #[command(flatten)]
        materialize: Materialize,
    },
    /// One prime per selected block of a cosunflower-free family
    FamilyBlowup {
        #[arg(long)]
        family: PathBuf,
        #[arg(long)]
        prime_limit: u64,
        #[arg(long, default_value_t = 2)]
        prime_min: u64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Number of random elements to draw and check
        #[arg(long, default_value_t = 0)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        materialize: Materialize,
    },
    /// Blow a base family up over a weighted partition of primes
    Weighted {
        #[arg(long)]
        c: String,
        #[arg(long)]
        base: PathBuf,
        /// `1/(p+1)`, `1/p`, or a constant such as `1/3`
        #[arg(long, default_value = "1/(p+1)")]
        weights: String,
        /// Closed prime range `lo:hi`
        #[arg(long)]
        prime_range: String,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
}

#[derive(Debug, Subcommand)]
enum HarmonicCommand {
    /// H_l(N): sum of 1/n over squarefree n <= N with l prime factors
    #[command(name = "Hl")]
    Hl {
        #[arg(long = "N")]
        n: u64,
        #[arg(long = "l")]
        ell: u32,
        /// Exact rational sum; default is exact up to 10^5
        #[arg(long)]
        float: bool,
    },
    /// A_l(x): count of squarefree n <= x with l prime factors
    #[command(name = "Al")]
    Al {
        #[arg(long)]
        x: u64,
        #[arg(long = "l")]
        ell: u32,
    },
    /// Sum of z^omega(m)/m for m <= X against its Euler product
    Zsum {
        #[arg(long = "X")]
        x: u64,
        #[arg(long)]
        z: f64,
    },
    /// The constant G(z) with its truncation bound
    #[command(name = "G")]
    G {
        #[arg(long)]
        z: f64,
        #[arg(long, default_value_t = 1_000_000)]
        cutoff: u64,
    },
    /// A_l(x) against its asymptotic main term
    SatheSelberg {
        #[arg(long)]
        x: u64,
        #[arg(long = "l")]
        ell: u32,
        #[arg(long, default_value_t = 1_000_000)]
        cutoff: u64,
    },
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn print_json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::data(e.to_string()))?;
    writeln!(out, "{text}").map_err(|e| CliError::data(e.to_string()))
}

fn read_file(path: &PathBuf) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn load_family(path: &PathBuf) -> CliResult<SetFamily> {
    let text = read_file(path)?;
    SetFamily::from_json_str(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn load_instance(path: &PathBuf) -> CliResult<LcmInstance> {
    let text = read_file(path)?;
    let xs = parse_instance(&text).map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
    LcmInstance::new(xs).map_err(|e| CliError::data(format!("{}: {e}", path.display())))
}

fn check_k(k: usize) -> CliResult<()> {
    if k < 3 {
        return Err(CliError::usage(format!("k must be at least 3, got {k}")));
    }
    Ok(())
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult {
    match command {
        Command::FkExact { n, k, budget } => {
            check_k(k)?;
            let r = exact_fk_with(n, k, &FkConfig { budget, ..FkConfig::default() })?;
            print_json(out, &r)?;
            Ok(if r.exact { EXIT_OK } else { EXIT_BUDGET })
        }
        Command::Capacity { n, k, budget, co } => {
            check_k(k)?;
            let pattern = if co { crate::setfam::Pattern::Cosunflower } else { crate::setfam::Pattern::Sunflower };
            let r = max_pattern_free(n, k, pattern, &SearchConfig { budget, ..SearchConfig::default() })?;
            print_json(out, &r)?;
            Ok(if r.exact { EXIT_OK } else { EXIT_BUDGET })
        }
        Command::SunflowerCheck { family, k, co } => {
            check_k(k)?;
            let fam = load_family(&family)?;
            let witness = if co { find_k_cosunflower(&fam, k)? } else { find_k_sunflower(&fam, k)? };
            print_json(out, &check_output(&fam, k, co, witness))?;
            Ok(EXIT_OK)
        }
        Command::LcmCheck { input, k } => {
            check_k(k)?;
            let inst = load_instance(&input)?;
            let tuple = find_lcm_k_tuple(&inst, k)?;
            #[derive(Serialize)]
            struct Out {
                k: usize,
                size: usize,
                free: bool,
                tuple: Option<Vec<u64>>,
            }
            print_json(out, &Out { k, size: inst.len(), free: tuple.is_none(), tuple })?;
            Ok(EXIT_OK)
        }
        Command::Supports { input } => {
            let inst = load_instance(&input)?;
            let fam = support_family(&inst).map_err(|e| CliError::data(e.to_string()))?;
            print_json(out, &fam)?;
            Ok(EXIT_OK)
        }
        Command::Bounds { k } => {
            print_json(out, &known_bounds(k)?)?;
            Ok(EXIT_OK)
        }
        Command::Construct(c) => construct(c, out),
        Command::Harmonic(h) => harmonic(h, out),
        Command::Report { config, out: dir, jobs } => {
            let text = read_file(&config)?;
            let cfg = ReportConfig::parse(&text).map_err(|e| CliError::data(format!("{}: {e}", config.display())))?;
            let dir = dir.or_else(|| cfg.output.clone().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("report"));
            let summary = run_report(&cfg, &dir, jobs.max(1))?;
            print_json(out, &summary)?;
            Ok(if summary.all_ok() { EXIT_OK } else { EXIT_DATA })
        }
    }
}

#[derive(Serialize)]
struct CheckOutput {
    k: usize,
    pattern: &'static str,
    free: bool,
    witness: Option<Vec<usize>>,
    witness_sets: Option<Vec<Vec<usize>>>,
}

fn check_output(fam: &SetFamily, k: usize, co: bool, witness: Option<Vec<usize>>) -> CheckOutput {
    let lists = fam.element_lists();
    CheckOutput {
        k,
        pattern: if co { "cosunflower" } else { "sunflower" },
        free: witness.is_none(),
        witness_sets: witness.as_ref().map(|w| w.iter().map(|&i| lists[i].clone()).collect()),
        witness,
    }
}

fn options(m: &Materialize) -> MaterializeOptions {
    MaterializeOptions { enumerate: m.emit_elements, cap: m.cap, allow_truncate: m.allow_truncate, ..Default::default() }
}

fn emit_report(out: &mut dyn Write, report: &ConstructionReport) -> CliResult {
    print_json(out, report)?;
    Ok(EXIT_OK)
}

fn construct(c: ConstructCommand, out: &mut dyn Write) -> CliResult {
    match c {
        ConstructCommand::UniformSubset { k, prime_limit, prime_min, threshold, blocks, interval, materialize } => {
            check_k(k)?;
            let b = if threshold == "auto" {
                threshold_from_f64(optimal_threshold(k)?)?
            } else {
                parse_rational(&threshold).ok_or_else(|| CliError::usage(format!("bad threshold {threshold:?}")))?
            };
            let table = PrimeTable::new(prime_limit)?;
            let convention = match interval {
                Interval::Closed => IntervalConvention::Closed,
                Interval::HalfOpen => IntervalConvention::HalfOpen,
            };
            let pool = bucket_pool(&table, prime_min as f64, prime_limit as f64, convention)?;
            let part = match blocks {
                Some(t) => greedy_buckets(&pool, &b, Some(t))?,
                None => greedy_buckets_partial(&pool, &b)?,
            };
            emit_report(out, &uniform_subset_construction(k, &part, &options(&materialize))?)
        }
        ConstructCommand::FamilyBlowup { family, prime_limit, prime_min, k, samples, seed, materialize } => {
            check_k(k)?;
            let fam = load_family(&family)?;
            let table = PrimeTable::new(prime_limit)?;
            let pool = bucket_pool(&table, prime_min as f64, prime_limit as f64, IntervalConvention::Closed)?;
            let part = unit_buckets(&pool, Some(fam.ground_size()))?;
            let opts = MaterializeOptions { samples, seed, ..options(&materialize) };
            emit_report(out, &family_blowup_construction(&fam, k, &part, &opts)?)
        }
        ConstructCommand::Weighted { c, base, weights, prime_range, k } => {
            check_k(k)?;
            let c = parse_rational(&c).ok_or_else(|| CliError::usage(format!("bad c {c:?}")))?;
            let (lo, hi) = prime_range
                .split_once(':')
                .and_then(|(a, b)| Some((a.trim().parse::<u64>().ok()?, b.trim().parse::<u64>().ok()?)))
                .ok_or_else(|| CliError::usage(format!("prime range must be lo:hi, got {prime_range:?}")))?;
            let table = PrimeTable::new(hi)?;
            let primes = table.primes_in_closed(lo as f64, hi as f64)?.to_vec();
            let wgs = weight_set(&primes, &weights)?;
            let base_family = load_family(&base)?;
            let rep = weighted_cosunflower_pipeline(&wgs, &c, &base_family, k)?;
            let mut json = rep.to_json();
            json["primes"] = serde_json::json!(primes);
            json["weights"] = serde_json::json!(weights);
            json["c"] = serde_json::json!(format_rational(&c));
            if weights.replace(' ', "") == "1/(p+1)" {
                let (lhs, rhs) = harmonic_measure_identity(&primes, &rep.family)?;
                json["harmonic_identity"] = serde_json::json!({
                    "reciprocal_sum": format_rational(&lhs),
                    "measure_ratio": format_rational(&rhs),
                    "holds": lhs == rhs,
                });
            }
            print_json(out, &json)?;
            Ok(EXIT_OK)
        }
    }
}

fn weight_set(primes: &[u64], rule: &str) -> CliResult<WeightedGroundSet> {
    let compact = rule.replace(' ', "");
    let weights: Vec<BigRational> = match compact.as_str() {
        "1/(p+1)" => primes.iter().map(|&p| BigRational::new(1.into(), (p + 1).into())).collect(),
        "1/p" => primes.iter().map(|&p| BigRational::new(1.into(), p.into())).collect(),
        other => {
            let w = parse_rational(other).ok_or_else(|| CliError::usage(format!("unknown weight rule {rule:?}")))?;
            vec![w; primes.len()]
        }
    };
    Ok(WeightedGroundSet::new(primes.iter().map(|p| p.to_string()).collect(), weights)?)
}

fn harmonic(h: HarmonicCommand, out: &mut dyn Write) -> CliResult {
    match h {
        HarmonicCommand::Hl { n, ell, float } => {
            let sieve = omega_sieve(n)?;
            let mode = if float || n > EXACT_SUM_LIMIT { SumMode::Float } else { SumMode::Exact };
            print_json(out, &h_ell(&sieve, n, ell, mode)?)?;
        }
        HarmonicCommand::Al { x, ell } => {
            let sieve = omega_sieve(x)?;
            let count = a_ell(&sieve, x, ell)?;
            print_json(out, &serde_json::json!({ "quantity": "A_l", "bound": x, "parameter": ell, "value": count }))?;
        }
        HarmonicCommand::Zsum { x, z } => {
            let sieve = omega_sieve(x)?;
            let table = PrimeTable::new(x)?;
            let sum = z_omega_sum(&sieve, x, z)?;
            let maj = euler_majorant(&table, x, z)?;
            print_json(
                out,
                &serde_json::json!({ "X": x, "z": z, "sum": sum.value, "majorant": maj.value, "holds": sum.value <= maj.value }),
            )?;
        }
        HarmonicCommand::G { z, cutoff } => {
            if !(0.0..2.0).contains(&z) {
                return Err(CliError::usage(format!("G(z) needs 0 <= z < 2, got {z}")));
            }
            print_json(out, &g_constant_with(&PrimeTable::new(cutoff)?, z)?)?;
        }
        HarmonicCommand::SatheSelberg { x, ell, cutoff } => {
            let table = PrimeTable::new(cutoff)?;
            let main = sathe_selberg_main_term(x, ell, &table)?;
            let count = a_ell(&omega_sieve(x)?, x, ell)?;
            print_json(
                out,
                &serde_json::json!({ "x": x, "l": ell, "count": count, "main_term": main, "ratio": count as f64 / main }),
            )?;
        }
    }
    Ok(EXIT_OK)
}
