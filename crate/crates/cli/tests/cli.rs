use std::path::PathBuf;
use std::process::Command;

use tcd_sim::config::{EnvironmentSpec, ScenarioConfig};
use tcd_sim::exit;

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn tcd(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_tcd-sim")).args(args).output().unwrap()
}

#[test]
fn written_config_reloads_unchanged() {
    let dir = tmp("cli-roundtrip");
    let cfg_path = dir.join("in.json");
    std::fs::write(&cfg_path, r#"{"environment": {"model": "two_sided", "p_a": 0.1, "p_b": 0.2, "inner": {"model": "full"}}}"#)
        .unwrap();
    let out = dir.join("out");
    let o = tcd(&["run", "--config", cfg_path.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let written = ScenarioConfig::load(&out.join("config.json")).unwrap();
    let mut original = ScenarioConfig::load(&cfg_path).unwrap();
    original.output.dir = out.clone();
    assert_eq!(written, original);
    assert!(matches!(written.environment, EnvironmentSpec::TwoSided { .. }));
}

#[test]
fn csv_files_have_expected_headers() {
    let out = tmp("cli-headers");
    let o = tcd(&["run", "--preset", "mixed", "--seed", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let header = |f: &str| std::fs::read_to_string(out.join(f)).unwrap().lines().next().unwrap().to_string();
    assert_eq!(header("single_particle.csv"), "y,rho");
    assert_eq!(header("coincidence.csv"), "ya,yb,rho");
    assert_eq!(header("profile.csv"), "dy,engine,closed_form");
    assert_eq!(header("visibility.csv"), "method,v,max_density,min_density,expected_v");
    assert_eq!(header("montecarlo.csv"), "bin_lo,bin_hi,count,expected");
    let vis = std::fs::read_to_string(out.join("visibility.csv")).unwrap();
    let row: Vec<&str> = vis.lines().nth(1).unwrap().split(',').collect();
    let v: f64 = row[1].parse().unwrap();
    assert!((v - 0.5).abs() < 1e-9, "{v}");
    let coinc = std::fs::read_to_string(out.join("coincidence.csv")).unwrap();
    assert_eq!(coinc.lines().count(), 1 + 201 * 201);
}

#[test]
fn json_bundle_has_sorted_top_level_keys() {
    let out = tmp("cli-json");
    let o = tcd(&["run", "--format", "json", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(out.join("bundle.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
    assert_eq!(keys, ["config", "maps", "montecarlo", "visibility"]);
    let first = |k: &str| text.find(&format!("\n  \"{k}\"")).unwrap();
    assert!(first("config") < first("maps") && first("maps") < first("montecarlo"));
}

#[test]
fn sweep_writes_one_row_per_step() {
    let out = tmp("cli-sweep");
    let o = tcd(&["sweep", "--param", "p2", "--start", "0", "--stop", "0.5", "--steps", "6", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "parameter,value,effective_w1,visibility_engine,visibility_expected,abs_diff,status");
    assert_eq!(lines.len(), 7);
    assert!(lines[1..].iter().all(|l| l.ends_with(",ok")));
}

#[test]
fn bad_inputs_map_to_exit_codes() {
    let dir = tmp("cli-errors");
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"grid": {"points": 1}}"#).unwrap();
    assert_eq!(tcd(&["run", "--config", bad.to_str().unwrap()]).status.code(), Some(exit::CONFIG));
    std::fs::write(&bad, r#"{"environment": {"model": "partial", "n": 0.9, "m": 0.9}}"#).unwrap();
    let o = tcd(&["run", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(exit::CONFIG));
    assert!(String::from_utf8_lossy(&o.stderr).contains("environment"));
    let missing = dir.join("missing.json");
    assert_eq!(tcd(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(exit::CONFIG));
    assert_eq!(tcd(&["sweep", "--param", "n", "--start", "0.5", "--stop", "0.1", "--steps", "3"]).status.code(), Some(exit::CONFIG));
    assert_eq!(tcd(&["frobnicate"]).status.code(), Some(exit::CONFIG));
}
