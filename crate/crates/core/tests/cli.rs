use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ckdv_core::harness::RunManifest;
use ckdv_core::io::read_snapshot;

fn ckdv(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ckdv"))
        .args(args)
        .env("CKDV_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = r#"{"grid": {"n": 64, "period": 20}, "final_time": 0.1, "stepper": {"dt": 0.001}}"#;

#[test]
fn simulate_writes_outputs_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("run");
    let res = ckdv(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stdout).contains("PASS finite_diagnostics"));
    let manifest: RunManifest = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest.passed);
    assert_eq!(manifest.config.grid.n, 64);
    for f in &manifest.files {
        assert!(out.join(f).exists(), "{f}");
    }
    let last = read_snapshot(&out.join("snapshot_001.ckdv")).unwrap();
    assert!((last.t - 0.1).abs() < 1e-12);
    assert_eq!(last.u.len(), 64);
}

#[test]
fn diagnose_reads_written_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let run = dir.path().join("run");
    assert_eq!(
        ckdv(&["simulate", "--config", &cfg, "--out", run.to_str().unwrap(), "--quiet"])
            .status
            .code(),
        Some(0)
    );
    let snap = run.join("snapshot_001.ckdv");
    let dcfg = dir.path().join("diag.json");
    fs::write(
        &dcfg,
        format!(r#"{{"diagnose": {{"snapshot": {:?}}}}}"#, snap.to_str().unwrap()),
    )
    .unwrap();
    let out = dir.path().join("diag");
    let res = ckdv(&[
        "diagnose",
        "--config",
        dcfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let text = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(text.starts_with("t,V,F,"));
    assert!(text.lines().nth(1).unwrap().starts_with("1.0000000000000"));
}

#[test]
fn seed_flag_controls_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"grid": {"n": 64, "period": 20}, "final_time": 0.05, "stepper": {"dt": 0.001},
            "lipschitz": {"deltas": [1e-2, 1e-3], "horizons": [0.05]}}"#,
    );
    let read = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let res = ckdv(&[
            "lipschitz",
            "--config",
            &cfg,
            "--out",
            out.to_str().unwrap(),
            "--seed",
            seed,
            "--quiet",
        ]);
        assert!(res.status.code() == Some(0) || res.status.code() == Some(1));
        fs::read(out.join("lipschitz.csv")).unwrap()
    };
    let a = read("1", "a");
    let b = read("1", "b");
    let c = read("2", "c");
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn bad_configs_exit_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    for body in [
        r#"{"final_tme": 1.0}"#,
        r#"{"grid": {"n": 100, "period": 20}}"#,
        r#"{"stepper": {"dt": -1.0}}"#,
        r#"{"kind": "picard_study"}"#,
        "not json",
    ] {
        let cfg = write_config(dir.path(), body);
        let res = ckdv(&["simulate", "--config", &cfg, "--out", out]);
        assert_eq!(res.status.code(), Some(2), "{body}");
        assert!(!Path::new(out).join("manifest.json").exists(), "{body}");
    }
    assert_eq!(ckdv(&["simulate"]).status.code(), Some(2));
    assert_eq!(ckdv(&["frobnicate", "--config", "x"]).status.code(), Some(2));
}

#[test]
fn failing_checks_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"grid": {"n": 64, "period": 20}, "final_time": 1.0, "stepper": {"dt": 0.01},
            "initial": {"u": {"kind": "gaussian", "amplitude": 1e6, "width": 0.3, "center": 0},
                        "v": {"kind": "zero"}}}"#,
    );
    let out = dir.path().join("o");
    let res = ckdv(&["simulate", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let manifest: RunManifest = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert!(manifest.error.is_some());
}
