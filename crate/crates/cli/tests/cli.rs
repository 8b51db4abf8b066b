//! End-to-end tests of the `hspec` binary.

use std::path::Path;
use std::process::Command;

fn hspec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hspec"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

const SCALE_CONFIG: &str = r#"{"map": {"compose": [{"scale": 0.5}], "branch": 1}, "n_c": 16}"#;

#[test]
fn selftest_passes() {
    let status = hspec().arg("selftest").status().unwrap();
    assert_eq!(status.code(), Some(0));
}

#[test]
fn singular_suite_matches_diagonal_oracle_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SCALE_CONFIG);
    for out in ["a", "b"] {
        let status = hspec()
            .args(["singular", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(dir.path().join(out))
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(0));
    }
    let csv = std::fs::read_to_string(dir.path().join("a/spectrum.csv")).unwrap();
    let first = csv.lines().nth(1).unwrap();
    let s1: f64 = first.split(',').nth(1).unwrap().parse().unwrap();
    assert!((s1 - 0.5f64.sqrt()).abs() < 1e-12);
    for file in ["spectrum.csv", "matrix.csv", "matrix.hspm", "summary.json", "manifest.json"] {
        let a = std::fs::read(dir.path().join("a").join(file)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file} not byte-identical across reruns");
    }
}

#[test]
fn fisher_suite_counts_zeros_of_monomials() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"map": {"compose": [{"scale": 1.0}], "branch": 1}, "n_c": 12, "t_grid": [0.8, 1.0]}"#,
    );
    let out = dir.path().join("out");
    let status = hspec()
        .args(["fisher", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("deformation.csv")).unwrap();
    // At t = 0.8 the n-th eigenfunction is z^{n-1} with n - 1 zeros.
    for (n, zeros) in [(1, 0), (2, 1), (3, 2)] {
        let row = csv
            .lines()
            .find(|l| l.starts_with("8.0") && l.split(',').nth(1) == Some(&n.to_string()))
            .unwrap();
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[4], zeros.to_string(), "row {row}");
    }
}

#[test]
fn invalid_truncation_exits_64_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"map": {"compose": [{"scale": 0.5}], "branch": 1}, "n_c": 16, "n_r": 32}"#,
    );
    let output = hspec()
        .args(["singular", "--config"])
        .arg(&config)
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(64));
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("n_r"), "stderr: {stderr}");
}

#[test]
fn set_overrides_change_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SCALE_CONFIG);
    let out = dir.path().join("out");
    let status = hspec()
        .args(["singular", "--config"])
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(["--set", "n_c=8"])
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("spectrum.csv")).unwrap();
    assert_eq!(csv.lines().count(), 9); // header + 8 singular values
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let status = hspec().args(["singular", "--bogus"]).status().unwrap();
    assert_eq!(status.code(), Some(64));
}
