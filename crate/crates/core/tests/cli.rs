mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::assert_valid;
use serde_json::Value;

fn lcmsf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcmsf")).args(args).env_remove("LCMSF_CACHE_DIR").output().unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = lcmsf(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn fk_exact_examples_and_codes() {
    for (n, k, v) in [("4", "3", "25/12"), ("1", "3", "1"), ("2", "5", "3/2")] {
        let out = json_ok(&["fk-exact", "--N", n, "--k", k]);
        assert_valid("fk-result", &out);
        assert_eq!(out["value"], v);
    }
    assert_eq!(lcmsf(&["fk-exact", "--N", "4", "--k", "2"]).status.code(), Some(64));
    let limited = lcmsf(&["fk-exact", "--N", "40", "--k", "3", "--budget", "3"]);
    assert_eq!(limited.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&limited.stdout).unwrap();
    assert_valid("fk-result", &v);
    assert_eq!(v["exact"], false);
    assert_eq!(lcmsf(&["no-such-command"]).status.code(), Some(64));
}

#[test]
fn capacity_and_bounds() {
    let out = json_ok(&["capacity", "--n", "2", "--k", "3"]);
    assert_valid("capacity-result", &out);
    assert_eq!(out["F"], 3);
    let out = json_ok(&["capacity", "--n", "3", "--k", "3", "--co"]);
    assert_valid("capacity-result", &out);
    let out = json_ok(&["bounds", "--k", "3"]);
    assert_valid("bounds", &out);
    assert!((out["upper"].as_f64().unwrap() - 1.889881574).abs() < 1e-9);
}

#[test]
fn family_commands() {
    let dir = tempfile::tempdir().unwrap();
    let ints = write(dir.path(), "ints.txt", "6 10 15\n");
    let fam = json_ok(&["supports", "--input", &ints]);
    assert_valid("family", &fam);
    let f = write(dir.path(), "f.json", &fam.to_string());
    let out = json_ok(&["sunflower-check", "--family", &f, "--k", "3", "--co"]);
    assert_valid("sunflower-check", &out);
    assert_eq!(out["free"], false);
    assert_eq!(out["witness"], serde_json::json!([0, 1, 2]));
    let out = json_ok(&["sunflower-check", "--family", &f, "--k", "3"]);
    assert_eq!(out["free"], true);

    let out = json_ok(&["lcm-check", "--input", &ints, "--k", "3"]);
    assert_valid("lcm-check", &out);
    assert_eq!(out["tuple"], serde_json::json!([6, 10, 15]));

    let bad = write(dir.path(), "bad.json", "{\"ground_size\": 3,\n \"members\": [[0], [7]]}");
    let out = lcmsf(&["sunflower-check", "--family", &bad, "--k", "3"]);
    assert_eq!(out.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&out.stderr).contains("members[1]"));
    let broken = write(dir.path(), "broken.json", "{\"ground_size\": 3,\n \"members\": [[0], [1]\n");
    let out = lcmsf(&["sunflower-check", "--family", &broken, "--k", "3"]);
    assert_eq!(out.status.code(), Some(65));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
    let unknown = write(dir.path(), "unknown.json", "{\"ground_size\": 1, \"members\": [], \"extra\": 1}");
    assert_eq!(lcmsf(&["sunflower-check", "--family", &unknown, "--k", "3"]).status.code(), Some(65));
    assert_eq!(lcmsf(&["sunflower-check", "--family", "/nonexistent.json", "--k", "3"]).status.code(), Some(65));
}

#[test]
fn construct_commands() {
    let out = json_ok(&["construct", "uniform-subset", "--k", "4", "--prime-limit", "200", "--B", "auto"]);
    assert_valid("construction-report", &out);
    let b = out["construction_params"]["B"].as_f64().unwrap();
    assert!((b - std::f64::consts::E * 2f64.sqrt()).abs() < 1e-9);
    let c4 = 2.0 / (std::f64::consts::E * 2f64.sqrt());
    assert!((out["predicted_exponent"].as_f64().unwrap() - c4).abs() < 1e-9);

    let out = json_ok(&[
        "construct", "uniform-subset", "--k", "3", "--prime-limit", "400", "--prime-min", "5", "--B", "1/2",
        "--emit-elements",
    ]);
    assert_valid("construction-report", &out);
    let checks = out["freeness_checks"].as_array().unwrap();
    assert_eq!(checks.len(), 2);
    assert!(checks.iter().all(|c| c["passed"] == true));

    let capped = lcmsf(&[
        "construct", "uniform-subset", "--k", "3", "--prime-limit", "400", "--prime-min", "5", "--B", "1/2",
        "--emit-elements", "--cap", "10",
    ]);
    assert_eq!(capped.status.code(), Some(65));
    let out = json_ok(&[
        "construct", "uniform-subset", "--k", "3", "--prime-limit", "400", "--prime-min", "5", "--B", "1/2",
        "--emit-elements", "--cap", "10", "--allow-truncate",
    ]);
    assert_eq!(out["truncated"], true);
    assert_eq!(out["sampled_elements"].as_array().unwrap().len(), 10);

    let dir = tempfile::tempdir().unwrap();
    let fam = write(dir.path(), "fam.json", r#"{"ground_size": 2, "members": [[], [0], [1]]}"#);
    let out = json_ok(&["construct", "family-blowup", "--family", &fam, "--prime-limit", "500"]);
    assert_valid("construction-report", &out);
    assert!(out["harmonic_sum_float"].as_f64().unwrap() >= 3.0);
    let out = json_ok(&["construct", "family-blowup", "--family", &fam, "--prime-limit", "500", "--samples", "50", "--seed", "4"]);
    assert!(out["freeness_checks"].as_array().unwrap().iter().all(|c| c["passed"] == true));

    let base = write(dir.path(), "base.json", r#"{"ground_size": 3, "members": [[], [0], [1], [2]]}"#);
    let out = json_ok(&["construct", "weighted", "--c", "0.25", "--base", &base, "--weights", "1/(p+1)", "--prime-range", "5:200"]);
    assert_valid("weighted-report", &out);
    assert_eq!(out["harmonic_identity"]["holds"], true);
    assert_eq!(out["measure"], out["measure_by_blocks"]);
}

#[test]
fn harmonic_commands() {
    let out = json_ok(&["harmonic", "Hl", "--N", "10", "--l", "2"]);
    assert_valid("harmonic-ledger", &out);
    assert_eq!(out["exact"], "4/15");
    let out = json_ok(&["harmonic", "Al", "--x", "10", "--l", "2"]);
    assert_valid("harmonic-count", &out);
    assert_eq!(out["value"], 2);
    let out = json_ok(&["harmonic", "zsum", "--X", "1000", "--z", "1.5"]);
    assert_valid("zsum", &out);
    assert_eq!(out["holds"], true);
    let out = json_ok(&["harmonic", "G", "--z", "1", "--cutoff", "100000"]);
    assert_valid("g-value", &out);
    let out = json_ok(&["harmonic", "sathe-selberg", "--x", "1000000", "--l", "1", "--cutoff", "1000"]);
    assert_valid("sathe-selberg", &out);
    assert_eq!(out["count"], 78498);
    assert_eq!(lcmsf(&["harmonic", "G", "--z", "2"]).status.code(), Some(64));
}

#[test]
fn cache_directory_is_used() {
    let dir = tempfile::tempdir().unwrap();
    for _ in 0..2 {
        let out = Command::new(env!("CARGO_BIN_EXE_lcmsf"))
            .args(["harmonic", "Hl", "--N", "1000", "--l", "3"])
            .env("LCMSF_CACHE_DIR", dir.path())
            .output()
            .unwrap();
        assert!(out.status.success());
    }
    assert!(dir.path().join("omega-1000.bin").exists());
}

const REPORT: &str = r#"
seed = 11

[[experiments]]
name = "trend"
kind = "h-ell-trend"
bounds = [10000, 100000]
ells = [1, 2, 3]

[[experiments]]
name = "sweep"
kind = "exponent-sweep"
ks = [3, 4, 5]
b_min = 1.0
b_max = 8.0
steps = 15

[[experiments]]
name = "fk"
kind = "fk-table"
n_max = 40
k = 3

[[experiments]]
name = "capacity"
kind = "capacity-table"
n_max = 4
ks = [3]

[[experiments]]
name = "blowups"
kind = "blowup-sweep"
trials = 50
max_ground = 10
k = 3
format = "json"
"#;

#[test]
fn report_bundle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "report.toml", REPORT);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let sa = json_ok(&["report", &cfg, "--out", a.to_str().unwrap()]);
    let sb = json_ok(&["report", &cfg, "--out", b.to_str().unwrap(), "--jobs", "4"]);
    assert_valid("report-summary", &sa);
    assert_eq!(sa, sb);
    let mut names: Vec<_> = std::fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 6);
    for n in names {
        assert_eq!(std::fs::read(a.join(&n)).unwrap(), std::fs::read(b.join(&n)).unwrap(), "{n:?}");
    }
    let fk = std::fs::read_to_string(a.join("fk.csv")).unwrap();
    assert_eq!(fk.lines().count(), 41);
    assert!(fk.lines().nth(4).unwrap().starts_with("4,3,25/12,"));

    let bad = write(dir.path(), "bad.toml", &REPORT.replace("steps = 15", "steps = 15\ncolour = 1"));
    assert_eq!(lcmsf(&["report", &bad]).status.code(), Some(65));
    let failing = write(dir.path(), "failing.toml", "[[experiments]]\nname = \"x\"\nkind = \"fk-table\"\nn_max = 3\nk = 1\n");
    let out = lcmsf(&["report", &failing, "--out", dir.path().join("c").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(65));
}
