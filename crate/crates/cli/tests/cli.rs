use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const AD_Z: &str = r#"{"kind": "kraus", "dim": 2, "data": [[[1, 0], [0, -1]]]}"#;
const DEPOLARIZING: &str =
    r#"{"kind": "kraus", "dim": 2, "data": [[[0.8660254037844386, 0], [0, 0.8660254037844386]], [[0, 0.5], [0, 0]], [[0, 0], [0.5, 0]]]}"#;
const CYCLE3: &str = "[[0, 1, 0], [0, 0, 1], [1, 0, 0]]";
const NOT_UNITAL: &str = r#"{"kind": "kraus", "dim": 2, "data": [[[1, 0], [0, 0.5]]]}"#;

fn asymlift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asymlift")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn validate_accepts_ucp_and_rejects_otherwise() {
    let dir = TempDir::new().unwrap();
    let ok = asymlift(&["validate", path(&write(dir.path(), "z.json", AD_Z))]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(json(&ok)["unital"], true);
    let bad = asymlift(&["validate", path(&write(dir.path(), "n.json", NOT_UNITAL))]);
    assert_eq!(bad.status.code(), Some(1));
    assert_eq!(json(&bad)["unital"], false);
}

#[test]
fn logs_go_to_stderr_only() {
    let dir = TempDir::new().unwrap();
    let out = asymlift(&["analyze", path(&write(dir.path(), "z.json", AD_Z))]);
    assert!(out.status.success());
    let v = json(&out);
    assert!(v["sub_radius"].as_f64().unwrap() < 1e-9);
    assert!(!out.stderr.is_empty());
}

#[test]
fn classify_exit_codes_follow_the_verdict() {
    let dir = TempDir::new().unwrap();
    let z = asymlift(&["classify", path(&write(dir.path(), "z.json", AD_Z))]);
    assert_eq!(z.status.code(), Some(1));
    assert_eq!(json(&z)["report"]["verdict"], "not_slowly_oscillating");
    let dep = asymlift(&["classify", path(&write(dir.path(), "d.json", DEPOLARIZING))]);
    assert_eq!(dep.status.code(), Some(0));
    assert_eq!(json(&dep)["report"]["verdict"], "slowly_oscillating");
}

#[test]
fn lift_verify_reports_levels() {
    let dir = TempDir::new().unwrap();
    let out = asymlift(&["lift", "--verify", "--levels", "1,2", path(&write(dir.path(), "z.json", AD_Z))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["dim"], 4);
    assert_eq!(v["wedderburn"]["blocks"], serde_json::json!([2]));
    assert_eq!(v["verification"]["levels"].as_array().unwrap().len(), 2);
}

#[test]
fn markov_reports_period_and_decay() {
    let dir = TempDir::new().unwrap();
    let out = asymlift(&["markov", "--nmax", "50", path(&write(dir.path(), "c.json", CYCLE3))]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["lift"]["period"], 3);
    assert_eq!(v["decay"]["holds"], true);
    assert_eq!(v["decay"]["curve"].as_array().unwrap().len(), 50);
}

#[test]
fn verify_lift_accepts_the_built_lift() {
    let dir = TempDir::new().unwrap();
    let ch = write(dir.path(), "z.json", AD_Z);
    // Basis of M_2, alpha = Ad Z in that basis, E = inclusion.
    let cand = r#"{
        "basis": [[[1, 0], [0, 0]], [[0, 1], [0, 0]], [[0, 0], [1, 0]], [[0, 0], [0, 1]]],
        "alpha": [[1, 0, 0, 0], [0, -1, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]],
        "e": [[[1, 0], [0, 0]], [[0, 1], [0, 0]], [[0, 0], [1, 0]], [[0, 0], [0, 1]]]
    }"#;
    let out = asymlift(&["verify-lift", path(&ch), path(&write(dir.path(), "cand.json", cand))]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["pass"], true);
}

#[test]
fn out_flag_writes_a_file() {
    let dir = TempDir::new().unwrap();
    let target = dir.path().join("bundle.json");
    let out = asymlift(&["run", "--seed", "7", "--out", path(&target), path(&write(dir.path(), "z.json", AD_Z))]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&target).unwrap()).unwrap();
    assert_eq!(v["config"]["seed"], 7);
    assert!(v["errors"].as_array().unwrap().is_empty());
}

#[test]
fn config_file_and_flags_compose() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cfg.json", r#"{"samples": 5, "k_max": 30}"#);
    let out = asymlift(&["run", "--config", path(&cfg), "--kmax", "40", path(&write(dir.path(), "z.json", AD_Z))]);
    let v = json(&out);
    assert_eq!(v["config"]["samples"], 5);
    assert_eq!(v["config"]["k_max"], 40);
}

#[test]
fn golden_bless_then_check() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "z.json", AD_Z);
    write(dir.path(), "c.json", CYCLE3);
    let missing = asymlift(&["golden", path(dir.path())]);
    assert_eq!(missing.status.code(), Some(1));
    assert_eq!(asymlift(&["golden", "--bless", path(dir.path())]).status.code(), Some(0));
    let again = asymlift(&["golden", path(dir.path())]);
    assert_eq!(again.status.code(), Some(0));
    assert_eq!(json(&again)["passed"], 2);
}

#[test]
fn malformed_input_exits_two() {
    let dir = TempDir::new().unwrap();
    let out = asymlift(&["analyze", path(&write(dir.path(), "bad.json", "{\"kind\": 3}"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

#[test]
fn classify_rejects_non_ucp_input_with_two() {
    let dir = TempDir::new().unwrap();
    let out = asymlift(&["classify", path(&write(dir.path(), "n.json", NOT_UNITAL))]);
    assert_eq!(out.status.code(), Some(2));
}
