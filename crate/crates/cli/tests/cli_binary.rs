//! End-to-end checks of the compiled binary: exit codes and file outputs.

use std::process::Command;

fn calfib() -> Command {
    Command::new(env!("CARGO_BIN_EXE_calfib"))
}

#[test]
fn passing_suite_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = calfib()
        .args(["--suite", "orbifold", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report_path = dir.path().join("report-orbifold.json");
    assert!(report_path.exists());
    let text = std::fs::read_to_string(&report_path).unwrap();
    let rep: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(rep["summary"]["failed"], 0);
    assert_eq!(rep["header"]["schema_version"], 1);
}

#[test]
fn unknown_suite_exits_two() {
    let out = calfib().args(["--suite", "bogus"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_suite_flag_prints_usage() {
    let out = calfib().output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("usage"));
}

#[test]
fn config_file_and_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.cfg");
    std::fs::write(&cfg_path, "seed = 7\nresolution.comass_samples = 500\n").unwrap();
    let out = calfib()
        .args(["--suite", "orbifold", "--config"])
        .arg(&cfg_path)
        .args(["--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success());
    let rep: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("report-orbifold.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(rep["header"]["seed"], 7);
    // malformed config exits 2
    std::fs::write(&cfg_path, "this is not key value\n").unwrap();
    let out = calfib()
        .args(["--suite", "orbifold", "--config"])
        .arg(&cfg_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn csv_refusal_for_scalar_case() {
    let dir = tempfile::tempdir().unwrap();
    let status = calfib()
        .args(["--suite", "mirror", "--out"])
        .arg(dir.path())
        .status()
        .unwrap();
    assert!(status.success());
    let report = dir.path().join("report-mirror.json");
    let out = calfib()
        .args(["--csv-from-report"])
        .arg(&report)
        .args(["--case", "dual-representation"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("scalar"));
}
