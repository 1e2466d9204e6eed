//! Every subcommand runs, writes a manifest, and maps failures to exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn run(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfcomb"))
        .env("RUST_LOG", "error")
        .args(["--out", out.to_str().unwrap()])
        .args(args)
        .output()
        .unwrap()
}

const POINT: [&str; 4] = ["--detuning-ghz", "0.36", "--apin", "1.1e9"];

#[test]
fn every_subcommand_succeeds_and_writes_a_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["dispersion", "--l-max", "3"],
        vec!["overlap"],
        vec![
            "transmission",
            "--f-lo-thz",
            "214.5",
            "--f-hi-thz",
            "214.7",
            "--samples",
            "201",
        ],
        [&["steady"][..], &POINT].concat(),
        [&["spectrum"][..], &POINT].concat(),
        [&["duan"][..], &POINT].concat(),
        vec!["phase-diagram", "--n-delta", "6", "--n-apin", "6"],
        vec!["best-pump", "--n-delta", "6", "--n-apin", "6"],
        vec!["oracle", "mean-field"],
        vec!["oracle", "jacobian"],
        vec![
            "oracle",
            "langevin",
            "--f-norm",
            "0.5",
            "--dtp",
            "0",
            "--dtl",
            "0",
            "--samples",
            "200",
        ],
        vec!["oracle", "brute-duan"],
        vec!["reproduce", "--figure", "fig2"],
    ];
    for (k, args) in cases.iter().enumerate() {
        let dir = tmp.path().join(k.to_string());
        let o = run(&dir, args);
        assert!(
            o.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert!(dir.join("manifest.json").is_file(), "{args:?}");
        assert!(dir.join("timings.json").is_file(), "{args:?}");
    }
}

#[test]
fn json_format_prints_parseable_output() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = vec!["--format", "json", "steady"];
    args.extend(POINT);
    let o = run(tmp.path(), &args);
    assert!(o.status.success());
    serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap();
}

#[test]
fn missing_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(
        tmp.path(),
        &["--config", "/nonexistent/resonator.json", "dispersion"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    let o = run(
        &tmp.path().join("o"),
        &["--config", cfg.to_str().unwrap(), "dispersion"],
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(run(tmp.path(), &["frobnicate"]).status.code(), Some(2));
}

#[test]
fn invalid_mode_index_is_a_runtime_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(tmp.path(), &["steady", "--l", "0", "--apin", "1e9"]);
    assert_eq!(
        o.status.code(),
        Some(1),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
}
