//! End-to-end checks of the `eady` binary on a small, fast configuration.

use std::path::Path;
use std::process::{Command, Output};

use eady_slice::io::{read_snapshot, read_timeseries, restore};

const SMALL: &str = "\
# small grid, short run
nx = 8
nz = 6
dt = 600
breed_vmax = 1.7
run_days = 0.25
timeseries_interval = 1800
snapshot_interval = 7200
checkpoint_interval = 10800
";

fn eady(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eady"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("small.cfg");
    std::fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn dry_run_prints_canonical_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = eady(&["--config", &cfg, "run", "--dry-run"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("nx = 8\n"));
    assert!(text.contains("breed_vmax = 1.7\n"));
    assert!(text.lines().last().unwrap().starts_with("# config_hash = "));
    assert!(!dir.path().join("output").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "scalar_upwind_order = 7\n");
    assert_eq!(
        eady(&["--config", &bad, "run", "--dry-run"]).status.code(),
        Some(2)
    );
    let missing = dir.path().join("nope.cfg").display().to_string();
    assert_eq!(eady(&["--config", &missing, "run"]).status.code(), Some(4));
    let cfg = write_config(dir.path(), SMALL);
    let garbage = dir.path().join("garbage.vtk");
    std::fs::write(&garbage, "# vtk DataFile Version 3.0\ntruncated").unwrap();
    let out = eady(&["--config", &cfg, "diagnose", garbage.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn run_resume_and_diagnose() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out_s = out_dir.to_str().unwrap();
    let out = eady(&["--config", &cfg, "--out", out_s, "run"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for f in [
        "config.txt",
        "timeseries.csv",
        "breeding.txt",
        "bred.vtk",
        "latest.ckpt",
    ] {
        assert!(out_dir.join(f).exists(), "missing {f}");
    }
    let rows = read_timeseries(out_dir.join("timeseries.csv")).unwrap();
    // 6 h at 30 min cadence plus the initial row
    assert_eq!(rows.len(), 13);
    assert_eq!(rows[0].t, 0.0);

    // resuming from the mid-run checkpoint reproduces the tail bit for bit
    let ckpt_dir = out_dir.join("checkpoints");
    let mid = std::fs::read_dir(&ckpt_dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .min()
        .unwrap();
    let final_state = restore(out_dir.join("latest.ckpt"), None).unwrap().state;
    let resumed_dir = dir.path().join("resumed");
    std::fs::create_dir_all(&resumed_dir).unwrap();
    let out = eady(&[
        "--config",
        &cfg,
        "--out",
        resumed_dir.to_str().unwrap(),
        "run",
        "--resume",
        mid.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let again = restore(resumed_dir.join("latest.ckpt"), None)
        .unwrap()
        .state;
    assert_eq!(final_state, again);

    // diagnostics recomputed from the snapshots match the logged ones
    let out = eady(&["--config", &cfg, "--out", out_s, "diagnose"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let diag = read_timeseries(out_dir.join("diagnose.csv")).unwrap();
    assert_eq!(diag.len(), 4);
    for d in &diag {
        let logged = rows.iter().find(|r| r.t == d.t).expect("matching time");
        assert!((d.e - logged.e).abs() <= 1e-12 * logged.e.abs());
        assert!((d.rmsv - logged.rmsv).abs() <= 1e-12 * logged.rmsv.max(1e-30));
    }
}

#[test]
fn init_writes_initial_and_bred_states() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("init");
    let out = eady(&["--config", &cfg, "--out", out_dir.to_str().unwrap(), "init"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let initial = read_snapshot(out_dir.join("initial.vtk"))
        .unwrap()
        .to_state()
        .unwrap();
    let bred = read_snapshot(out_dir.join("bred.vtk"))
        .unwrap()
        .to_state()
        .unwrap();
    assert!(initial.max_abs_v() < 1.7);
    assert!(bred.max_abs_v() >= 1.7);
    assert_eq!(bred.t, 0.0);
    let ckpt = restore(out_dir.join("bred.ckpt"), None).unwrap();
    assert!(ckpt.t_breed.unwrap() > 0.0);
}
