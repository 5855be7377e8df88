//! End-to-end runs of the `semilinear-mc` binary.

use std::path::Path;
use std::process::{Command, Output};

use semilinear_mc::cli::records::read_records;
use serde_json::Value;

const BALL: &str = r#"{
  "version": 1,
  "seed": 4,
  "domain": {"type": "ball", "center": [0, 0, 0], "radius": 1},
  "sim": {"scheme": {"type": "euler_maruyama", "step_h": 0.001}},
  "points": [[0, 0, 0], [0.5, 0, 0]],
  "n_paths": 3000,
  "oracle_compare": {"n_radii": 4, "n_paths": 2000}
}"#;

fn run(args: &[&str], config: &str, dir: &Path) -> Output {
    let path = dir.join("config.json");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_semilinear-mc"))
        .args(args)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .env_remove("SEMILINEAR_MC_OUT")
        .env_remove("SEMILINEAR_MC_WORKERS")
        .output()
        .unwrap()
}

#[test]
fn estimate_exit_writes_a_record_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["estimate-exit", "--format", "csv"], BALL, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("oracle = 0.3333333333333333"), "{stdout}");

    let records = read_records(&dir.path().join("out/results.jsonl")).unwrap();
    assert_eq!(records.len(), 1);
    assert_eq!(records[0].subcommand, "estimate-exit");
    let rows = records[0].payload["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    let mean = rows[0]["estimate"]["mean"].as_f64().unwrap();
    let se = rows[0]["estimate"]["std_error"].as_f64().unwrap();
    // EM overshoot at h = 1e-3 adds about 4%
    assert!((mean - 1.0 / 3.0).abs() < 4.0 * se + 0.05 / 3.0, "{mean} ± {se}");

    let csv = dir.path().join(format!("out/estimate-exit-{}.csv", records[0].config_digest));
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 3);
}

#[test]
fn workers_do_not_change_payloads() {
    let payload = |workers: &str| -> Value {
        let dir = tempfile::tempdir().unwrap();
        let out = run(&["estimate-exit", "--workers", workers], BALL, dir.path());
        assert_eq!(out.status.code(), Some(0));
        read_records(&dir.path().join("out/results.jsonl")).unwrap().remove(0).payload
    };
    assert_eq!(payload("1"), payload("3"));
}

#[test]
fn seed_override_changes_digest() {
    let dir = tempfile::tempdir().unwrap();
    run(&["estimate-exit"], BALL, dir.path());
    run(&["estimate-exit", "--seed", "99"], BALL, dir.path());
    let records = read_records(&dir.path().join("out/results.jsonl")).unwrap();
    assert_eq!(records.len(), 2);
    assert_ne!(records[0].config_digest, records[1].config_digest);
    assert_ne!(records[0].payload, records[1].payload);
}

#[test]
fn missing_lambda_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"version": 1, "domain": {"type": "ball", "center": [0, 0, 0], "radius": 1}, "hypotheses": {"p": 1.2}}"#;
    let out = run(&["check-conditions"], config, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("lambda") && stderr.contains("/hypotheses"), "{stderr}");
    assert!(!dir.path().join("out/results.jsonl").exists());
}

#[test]
fn wrong_version_and_bad_step_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["estimate-exit"], &BALL.replace("\"version\": 1", "\"version\": 2"), dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["estimate-exit"], &BALL.replace("0.001", "-0.001"), dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_compare_then_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&["oracle-compare"], BALL, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records_path = dir.path().join("out/results.jsonl");
    let records = read_records(&records_path).unwrap();
    let rows = records[0].payload["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    for row in rows {
        let z = row["z_score"].as_f64().unwrap();
        assert!(z.abs() < 6.0, "{row}");
    }

    let plots = dir.path().join("plots");
    let out = Command::new(env!("CARGO_BIN_EXE_semilinear-mc"))
        .args(["plot", "--kind", "radial-profile", "--records"])
        .arg(&records_path)
        .arg("--out")
        .arg(&plots)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let dat = plots.join(format!("radial-profile-{}.dat", records[0].config_digest));
    assert_eq!(std::fs::read_to_string(dat).unwrap().lines().count(), 5);
}

#[test]
fn example2_report_runs_without_sampling() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"{"version": 1, "example2": {"delta": 1, "T": 10, "p": 1.2, "lambda": 1}}"#;
    let out = run(&["example2-report"], config, dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let records = read_records(&dir.path().join("out/results.jsonl")).unwrap();
    assert_eq!(records[0].payload["printed_direction_holds"], Value::Bool(false));
}
