//! End-to-end runs of the spinchaos binary.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spinchaos"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().unwrap();
    assert!(
        out.status.success(),
        "spinchaos {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

fn field(line: &str, idx: usize) -> f64 {
    line.split(',').nth(idx).unwrap().parse().unwrap()
}

#[test]
fn oat_run_is_deterministic_and_manifested() {
    let d1 = tempfile::tempdir().unwrap();
    let d2 = tempfile::tempdir().unwrap();
    for d in [&d1, &d2] {
        run_ok(&[
            "oat",
            "--N",
            "16",
            "--t-max",
            "0.5",
            "--out",
            d.path().to_str().unwrap(),
        ]);
    }
    let a = read(d1.path(), "oat_qfi.csv");
    let b = read(d2.path(), "oat_qfi.csv");
    assert_eq!(a, b);
    assert_eq!(a.lines().count(), 52);
    assert_eq!(a.lines().next().unwrap(), "t,F_Q,F_B,F_HP");

    let first = a.lines().nth(1).unwrap();
    for col in 1..=3 {
        assert!((field(first, col) - 16.0).abs() < 1e-9, "column {col}");
    }

    let manifest = read(d1.path(), "manifest.csv");
    assert_eq!(manifest, read(d2.path(), "manifest.csv"));
    let entry = manifest
        .lines()
        .find(|l| l.starts_with("oat_qfi.csv"))
        .unwrap();
    let parts: Vec<&str> = entry.split(',').collect();
    assert_eq!(parts[0], "oat_qfi.csv");
    assert_eq!(parts[1].len(), 64);
    assert!(parts[1].chars().all(|c| c.is_ascii_hexdigit()));
    assert_eq!(parts[2], "OK");
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "[oat]\nN = 12\nt_max = 0.2\n\n[qkr]\nperiods = 1\n").unwrap();
    run_ok(&[
        "oat",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = read(dir.path(), "oat_qfi.csv");
    assert_eq!(text.lines().count(), 22);
    assert!((field(text.lines().nth(1).unwrap(), 1) - 12.0).abs() < 1e-9);

    // flags still win over the file
    run_ok(&[
        "oat",
        "--config",
        cfg.to_str().unwrap(),
        "--N",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = read(dir.path(), "oat_qfi.csv");
    assert!((field(text.lines().nth(1).unwrap(), 1) - 10.0).abs() < 1e-9);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "[oat]\nN = 12\nt_mxa = 0.2\n").unwrap();
    let out = bin()
        .args([
            "oat",
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            dir.path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("t_mxa") && err.contains("line 3"), "{err}");
}

#[test]
fn invalid_parameters_exit_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["oat", "--N", "1", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = bin()
        .args(["depth", "--N", "8", "--out", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn depth_pipeline_reads_series_output() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "oat",
        "--N",
        "16",
        "--t-max",
        "0.5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let input = dir.path().join("oat_qfi.csv");
    run_ok(&[
        "depth",
        "--input",
        input.to_str().unwrap(),
        "--N",
        "16",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = read(dir.path(), "depth.csv");
    assert_eq!(text.lines().count(), 52);
    let first = text.lines().nth(1).unwrap();
    assert_eq!(field(first, 2), 1.0);
    for line in text.lines().skip(1) {
        let d = field(line, 2);
        assert!(d >= 1.0 && d <= 16.0 && d.fract() == 0.0);
    }
}

#[test]
fn qkr_runs_on_the_period_grid() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "qkr",
        "--N",
        "8",
        "--periods",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = read(dir.path(), "qkr_qfi.csv");
    // 2 periods of 1.01 on a 0.01 grid, t = 0 included
    assert_eq!(text.lines().count(), 204);
    let last = text.lines().last().unwrap();
    assert!((field(last, 0) - 2.02).abs() < 1e-9);
}

#[test]
fn lyap_map_covers_the_grid() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "lyap-map",
        "--na",
        "3",
        "--nc",
        "3",
        "--m",
        "30",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = read(dir.path(), "lyap_map.csv");
    assert_eq!(text.lines().count(), 10);
    for line in text.lines().skip(1) {
        assert!(field(line, 2).is_finite());
    }
}

#[test]
fn poincare_emits_seed_orbits() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "poincare",
        "--n-phi",
        "2",
        "--n-z",
        "2",
        "--periods",
        "5",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = read(dir.path(), "poincare.csv");
    assert_eq!(text.lines().next().unwrap(), "seed,period,phi,s_z");
    assert_eq!(text.lines().count(), 1 + 4 * 6);
    for line in text.lines().skip(1) {
        let phi = field(line, 2);
        let sz = field(line, 3);
        assert!((-std::f64::consts::PI..=std::f64::consts::PI).contains(&phi));
        assert!((-1.0..=1.0).contains(&sz));
    }
}

#[test]
fn breaktime_scan_writes_records_and_fits() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "breaktime-scan",
        "--regime",
        "stable",
        "--N",
        "8,12,16",
        "--t-max",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let text = read(dir.path(), "breaktime_stable_bmf.csv");
    assert_eq!(text.lines().count(), 4);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("sqrtN"), "{stdout}");
}

#[test]
fn qpt_emits_sweep_and_peaks() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "qpt",
        "--N",
        "8",
        "--c",
        "1",
        "--v",
        "1e-2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    let sweep = read(dir.path(), "qpt_sweep.csv");
    assert_eq!(
        sweep.lines().next().unwrap(),
        "t,A,s_z_exact,s_z_bmf,F_Q,F_B"
    );
    assert!(sweep.lines().count() > 10);
    let peaks = read(dir.path(), "qpt_peaks.csv");
    assert_eq!(peaks.lines().count(), 3);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("A*_Q"), "{stdout}");
}
