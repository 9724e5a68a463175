//! End-to-end tests of the `qfc` binary: exit codes, CSV shape, and
//! determinism of the emitted files.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qfc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn qfc_with_threads(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfc"))
        .args(args)
        .env("RAYON_NUM_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no signal")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn preset_list_names_both_presets() {
    let out = qfc(&["preset", "list"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("qutrit"));
    assert!(text.contains("heisenberg"));
}

#[test]
fn verify_qutrit_passes_and_reports_rank() {
    let out = qfc(&["verify", "qutrit"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("liouvillian rank: 8"));
    assert!(text.contains("settling witness"));
    assert!(text.contains("verification passed"));
}

#[test]
fn verify_heisenberg_passes_with_multiplicity_four() {
    let out = qfc(&["verify", "heisenberg"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert!(text.contains("liouvillian rank: 63"));
    assert!(text.contains("multiplicity 4"));
}

#[test]
fn verify_with_zero_control_hamiltonian_fails() {
    let out = qfc(&["verify", "qutrit", "--f0", "zero"]);
    assert_eq!(code(&out), 1);
    let text = stdout(&out);
    assert!(text.contains("unique controlled equilibrium: FAIL"));
}

#[test]
fn verify_unknown_preset_is_a_validation_error() {
    let out = qfc(&["verify", "oscillator"]);
    assert_eq!(code(&out), 1);
}

#[test]
fn config_with_unknown_key_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "[model]\npreset = \"qutrit\"\ntypo_key = 3\n").unwrap();
    let out = qfc(&["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("typo_key"));
}

#[test]
fn simulate_without_a_model_exits_one() {
    let out = qfc(&["simulate", "--controller", "free"]);
    assert_eq!(code(&out), 1);
}

fn read_rows(path: &Path) -> Vec<Vec<f64>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,mean_fidelity,stderr_fidelity,mean_x_estimate,control_duty_cycle"
    );
    lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn free_run_from_target_writes_unit_fidelity_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[model]\npreset = \"qutrit\"\n\
         [controller]\nkind = \"free\"\n\
         [ensemble]\nn_initial = 2\nruns_per_initial = 2\nt_final = 0.5\ndt = 0.001\nsample_every = 100\ninit_diag = [1.0, 0.0, 0.0]\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = qfc(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_rows(&out_dir.join("ensemble.csv"));
    // floor(T / (dt * sample_every)) + 1 rows
    assert_eq!(rows.len(), 6);
    for row in &rows {
        assert!((row[1] - 1.0).abs() < 1e-12, "mean fidelity {}", row[1]);
        assert_eq!(row[4], 0.0);
    }
    // audit trail: resolved config echoed next to the data
    let echoed = fs::read_to_string(out_dir.join("config.toml")).unwrap();
    assert!(echoed.contains("preset = \"qutrit\""));
    assert!(echoed.contains("dt = 0.001"));
    assert!(echoed.contains("master_seed = 0"));
}

#[test]
fn csv_is_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "4"), ("c", "2")] {
        let out_dir = dir.path().join(name);
        let out = qfc_with_threads(
            &[
                "simulate",
                "--preset",
                "qutrit",
                "--controller",
                "windowed",
                "--window-k",
                "20",
                "--n-initial",
                "3",
                "--runs-per-initial",
                "2",
                "--t-final",
                "0.3",
                "--dt",
                "0.001",
                "--sample-every",
                "50",
                "--seed",
                "99",
                "--out",
                out_dir.to_str().unwrap(),
            ],
            threads,
        );
        assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push(fs::read(out_dir.join("ensemble.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn trajectory_dump_writes_per_run_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = qfc(&[
        "simulate",
        "--preset",
        "qutrit",
        "--controller",
        "ergodic",
        "--n-initial",
        "2",
        "--runs-per-initial",
        "2",
        "--t-final",
        "0.2",
        "--dt",
        "0.001",
        "--sample-every",
        "100",
        "--dump-trajectories",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    for i in 0..2 {
        for j in 0..2 {
            let p = out_dir.join(format!("trajectories/traj_{i}_{j}.csv"));
            let text = fs::read_to_string(&p).unwrap();
            let mut lines = text.lines();
            assert_eq!(
                lines.next().unwrap(),
                "t,fidelity,x_true,x_estimate,control,y_cumulative"
            );
            assert_eq!(lines.count(), 3); // 0.2 / (0.001 * 100) + 1
        }
    }
}

#[test]
fn flags_override_config_file_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "[model]\npreset = \"qutrit\"\n[ensemble]\nmaster_seed = 1\nn_initial = 50\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let out = qfc(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "7",
        "--n-initial",
        "2",
        "--runs-per-initial",
        "1",
        "--t-final",
        "0.1",
        "--dt",
        "0.001",
        "--sample-every",
        "100",
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let echoed = fs::read_to_string(out_dir.join("config.toml")).unwrap();
    assert!(echoed.contains("master_seed = 7"));
    assert!(echoed.contains("n_initial = 2"));
}
