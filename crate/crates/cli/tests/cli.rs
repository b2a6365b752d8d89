use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sparsemap_cli::config::ConfigFile;
use sparsemap_cli::output::{read_records, write_records};
use sparsemap_cli::runner::run_parallel;
use sparsemap_cli::CliError;
use sparsemap_core::harness::run_experiment;
use tempfile::TempDir;

const DESK: &str = r#"{
  "params": {"n": 12, "m": 8, "p": 0.125, "mu1": 0.0, "sigma1": 1.0, "sigma_e": 0.25},
  "bounds": {"beta": 2.0, "beta_bar": 25.0},
  "trials": 12,
  "master_seed": 5,
  "rip_mode": {"sampled": 30}
}"#;

const REFERENCE: &str =
    r#"{"params": {"n": 4096, "m": 256, "p": 0.01, "mu1": 0.0, "sigma1": 25.0, "sigma_e": 1.0}}"#;

fn sparsemap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sparsemap"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn empty_record_stream_writes_empty_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("empty.jsonl");
    write_records(&path, std::iter::empty()).unwrap();
    assert_eq!(fs::read(&path).unwrap(), b"");
    assert!(read_records(&path).unwrap().is_empty());
}

#[test]
fn records_round_trip_through_json_lines() {
    let dir = TempDir::new().unwrap();
    let cfg = ConfigFile::parse(DESK).unwrap().experiment().unwrap();
    let run = run_experiment(&cfg).unwrap();
    let path = dir.path().join("records.jsonl");
    write_records(&path, run.records()).unwrap();
    let back = read_records(&path).unwrap();
    let original: Vec<_> = run.records().cloned().collect();
    assert_eq!(back, original);
    let text = fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 12);
    assert!(text.ends_with('\n'));
}

#[test]
fn parallel_runner_matches_sequential_run() {
    let cfg = ConfigFile::parse(DESK).unwrap().experiment().unwrap();
    let seq = run_experiment(&cfg).unwrap();
    for threads in [Some(1), Some(3), None] {
        assert_eq!(run_parallel(&cfg, threads).unwrap(), seq);
    }
}

#[test]
fn simulate_writes_records_and_aggregate() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "desk.json", DESK);
    let out = dir.path().join("r.jsonl");
    let agg = dir.path().join("agg.json");
    let o = sparsemap(&[
        "simulate",
        "--config",
        &cfg,
        "--out",
        out.to_str().unwrap(),
        "--aggregate",
        agg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read_records(&out).unwrap().len(), 12);
    let aggregate: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&agg).unwrap()).unwrap();
    assert_eq!(aggregate["trials_run"], 12);
    assert_eq!(aggregate["failures"], 0);
}

#[test]
fn fig1_single_point_at_reference_setting() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "ref.json", REFERENCE);
    let out = dir.path().join("fig1.csv");
    let o = sparsemap(&[
        "fig1",
        "--config",
        &cfg,
        "--beta-min",
        "1.6",
        "--beta-max",
        "1.6",
        "--steps",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "beta,k1,prob_lower");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("1.6,12.94"), "{}", lines[1]);
}

#[test]
fn constants_reports_both_bounds() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "ref.json", REFERENCE);
    let o = sparsemap(&[
        "constants",
        "--config",
        &cfg,
        "--beta",
        "2",
        "--beta-bar",
        "25",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["theorem1"]["k1"].as_f64().unwrap() - 13.77).abs() < 0.01);
    let complement = 1.0 - v["theorem2"]["prob_perfect"].as_f64().unwrap();
    assert!((3.9e-5..=4.3e-5).contains(&complement), "{complement}");
    let o = sparsemap(&["constants", "--config", &cfg, "--beta", "2"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.get("theorem2").is_none());
}

#[test]
fn verify_rip_and_propositions_run() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "desk.json", DESK);
    let o = sparsemap(&["verify-rip", "--config", &cfg, "--level", "3"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["supports_checked"], 220);
    assert_eq!(v["exhaustive"], true);
    let o = sparsemap(&[
        "verify-rip",
        "--config",
        &cfg,
        "--level",
        "3",
        "--samples",
        "10",
    ]);
    let s: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(s["epsilon_hat"].as_f64() <= v["epsilon_hat"].as_f64());
    let o = sparsemap(&[
        "check-propositions",
        "--config",
        &cfg,
        "--seed",
        "3",
        "--level",
        "4",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["all_passed"], true);
    assert_eq!(r["support_i"].as_array().unwrap().len(), 2);
}

#[test]
fn configuration_errors_exit_with_code_two() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"params": {"n": 4, "m": 8, "p": 0.1, "mu1": 0, "sigma1": 1, "sigma_e": 1}}"#,
    );
    let o = sparsemap(&["constants", "--config", &bad, "--beta", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let missing = dir.path().join("nope.json");
    let o = sparsemap(&[
        "constants",
        "--config",
        missing.to_str().unwrap(),
        "--beta",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.json"));
    let refcfg = write(dir.path(), "ref.json", REFERENCE);
    let o = sparsemap(&["constants", "--config", &refcfg, "--beta", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let out = dir.path().join("r.jsonl");
    let o = sparsemap(&[
        "simulate",
        "--config",
        &refcfg,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2), "simulate needs trials and bounds");
}

#[test]
fn output_errors_name_the_path() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "ref.json", REFERENCE);
    let out = dir.path().join("missing-dir").join("fig1.csv");
    let o = sparsemap(&["fig1", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("missing-dir"));
}

#[test]
fn numerical_failures_map_to_code_three() {
    let e = CliError::from(sparsemap_core::Error::NonFinite);
    assert_eq!(e.exit_code(), 3);
    let e = CliError::from(sparsemap_core::Error::Trial {
        trial_id: 4,
        source: Box::new(sparsemap_core::Error::NotPositiveDefinite {
            pivot: 1,
            value: -1.0,
        }),
    });
    assert_eq!(e.exit_code(), 3);
    let e = CliError::from(sparsemap_core::Error::DimensionMismatch {
        expected: 1,
        found: 2,
    });
    assert_eq!(e.exit_code(), 2);
}
