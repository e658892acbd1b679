use std::process::{Command, Output};

use photon_wigner::io::{parse_csv, parse_json, CSV_HEADER};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_photon-wigner")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn scan_writes_csv_table() {
    let out = cli(&["scan", "--radii", "4", "--phases", "6"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some(CSV_HEADER));
    let records = parse_csv(&text).unwrap();
    assert_eq!(records.len(), 24);
    assert_eq!((records[6].r_idx, records[6].phi_idx), (1, 0));
}

#[test]
fn scan_json_carries_metadata() {
    let out = cli(&["scan", "--radii", "3", "--phases", "4", "--format", "json", "--seed", "42", "--state", "fock"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let result = parse_json(&text).unwrap();
    assert_eq!(result.metadata.master_seed, 42);
    assert_eq!(result.records.len(), 12);
    assert!(text.contains("\"code_version\""));
    assert!(result.records[0].p_exact < 0.0);
}

#[test]
fn scan_to_file_then_compare() {
    let dir = std::env::temp_dir().join(format!("photon-wigner-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("scan.csv");
    let out = cli(&["scan", "--radii", "5", "--phases", "8", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());

    let out = cli(&["compare", "--input", path.to_str().unwrap(), "--json"]);
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["points"], 40);
    assert!(report["identity_rms"].as_f64().unwrap() < 1e-9);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn analytic_needs_no_sampling() {
    let out = cli(&["analytic", "--state", "vacuum", "--radii", "2", "--phases", "3"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 7);
    let first = text.lines().nth(1).unwrap();
    let value: f64 = first.rsplit(',').next().unwrap().parse().unwrap();
    assert_eq!(value, std::f64::consts::FRAC_2_PI);
}

#[test]
fn phase_noise_options_are_accepted() {
    for noise in ["none", "uniform", "arcsine", "gaussian"] {
        let out = cli(&["analytic", "--state", "phase-diffused", "--phase-noise", noise, "--noise-width", "0.8", "--radii", "2", "--phases", "2"]);
        assert!(out.status.success(), "{noise}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

#[test]
fn oracle_check_passes() {
    let out = cli(&["oracle-check"]);
    assert!(out.status.success(), "{}", stdout(&out));
    assert!(!stdout(&out).contains("[FAIL]"));
}

#[test]
fn invalid_configuration_exits_with_one() {
    for args in [
        &["scan", "--eta", "1.5"][..],
        &["scan", "--transmission", "0"],
        &["scan", "--radii", "0"],
        &["scan", "--intervals", "0"],
        &["scan", "--gamma", "-1"],
        &["scan", "--state", "squeezed"],
        &["--threads", "0", "scan"],
        &["frobnicate"],
    ] {
        let out = cli(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn io_failure_exits_with_three() {
    let out = cli(&["scan", "--radii", "2", "--phases", "2", "--out", "/nonexistent-dir/x/scan.csv"]);
    assert_eq!(out.status.code(), Some(3));
    let out = cli(&["compare", "--input", "/nonexistent-dir/scan.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn help_exits_cleanly() {
    let out = cli(&["--help"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("oracle-check"));
}
