use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn vibron(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vibron"))
        .args(args)
        .env_remove("VIBRON_WORKERS")
        .output()
        .expect("binary runs")
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn config_errors_exit_2_and_name_every_key() {
    let out = vibron(&["quench", "--gamma", "1.2", "--points", "1", "--t-max", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("gamma must lie in [0,1]"), "{err}");
    assert!(err.contains("points:"), "{err}");
    assert!(err.contains("t_max:"), "{err}");
}

#[test]
fn zero_gamma_quench_points_to_n0_only() {
    let out = vibron(&["quench", "--gamma", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("n0_only"));
}

#[test]
fn unknown_config_file_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"gamma": 0.3, "colour": "blue"}"#).unwrap();
    let out = vibron(&["quench", "--config", path_str(&cfg)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("colour"));
}

#[test]
fn writes_manifest_and_data_without_partial_leftovers() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("q.csv");
    let out = vibron(&[
        "quench", "--gamma", "0.3", "--n", "40", "--t-max", "10", "--points", "11", "--out", path_str(&data),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(&data).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,Xz_mean,lambda_minus,lambda_plus,xi2_opt,zeta2_opt,energy,norm,Jz_mean,sentinel_flag"
    );
    assert_eq!(lines.count(), 11);
    assert!(!dir.path().join("q.csv.partial").exists());

    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("q.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "quench");
    assert_eq!(manifest["library_version"], vibron_core::VERSION);
    assert_eq!(manifest["config"]["n"], 40);
    assert_eq!(manifest["config"]["points"], 11);
}

#[test]
fn flags_override_config_file_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"n": 30, "t_max": 5.0, "quench": {"points": 6}, "sweep": {"points": 99}}"#).unwrap();
    let data = dir.path().join("q.csv");
    let out = vibron(&["quench", "--config", path_str(&cfg), "--n", "24", "--out", path_str(&data)]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("q.csv.manifest.json")).unwrap()).unwrap();
    let c = &manifest["config"];
    assert_eq!(c["n"], 24);
    assert_eq!(c["t_max"], 5.0);
    assert_eq!(c["points"], 6);
    assert_eq!(c["gamma"], 0.3);
}

#[test]
fn stdout_is_the_default_sink() {
    let out = vibron(&["spectrum", "--n", "6", "--steps", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("gamma,level_index,energy_normalized\n"));
    // block l = 0 at N = 6 has 4 states, two gamma values
    assert_eq!(csv.lines().count(), 1 + 2 * 4);
    let manifest: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(manifest["command"], "spectrum");
}

#[test]
fn outputs_are_byte_identical_across_runs_and_worker_counts() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let p = dir.path().join(name);
        let out = vibron(&[
            "sweep", "--gammas", "0.1,0.25", "--ns", "12,16", "--t-max", "20", "--points", "50", "--workers", workers,
            "--out", path_str(&p),
        ]);
        assert_eq!(out.status.code(), Some(0));
        fs::read(p).unwrap()
    };
    let a = run("a.csv", "1");
    let b = run("b.csv", "3");
    assert_eq!(a, b);
}

#[test]
fn numeric_failures_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("w.csv");
    // full Cartesian dimension at N = 130 is 8646, above the dense cap
    let out = vibron(&[
        "wigner", "--n", "130", "--initial", "coherent", "--x", "0.5", "--time", "1", "--out", path_str(&data),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("cap"));
    assert!(!data.exists());
    assert!(dir.path().join("w.csv.manifest.json").exists());
}

#[test]
fn coherent_protocol_oscillates() {
    let out = vibron(&["coherent", "--n", "30", "--points", "3", "--t-max", "3.141592653589793"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<Vec<f64>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    let x0 = rows[0][1];
    assert!(x0 > 1.0);
    assert!((rows[2][1] + x0).abs() < 1e-10);
    assert!(rows[1][1].abs() < 1e-10);
}

#[test]
fn wigner_grid_has_header_and_shape() {
    let out = vibron(&[
        "wigner", "--n", "8", "--kind", "planar", "--x-len", "7", "--p-len", "5", "--time", "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kind,planar");
    assert!(lines[1].starts_with("axis0,X,"));
    assert!(lines[2].starts_with("axis1,P_X,"));
    assert!(lines[4].starts_with("retained_weight,"));
    let rows: Vec<&&str> = lines.iter().skip(6).collect();
    assert_eq!(rows.len(), 7);
    assert!(rows.iter().all(|r| r.split(',').count() == 5));
}

#[test]
fn meanfield_marks_the_separatrix() {
    let out = vibron(&["meanfield", "--gamma", "0.5", "--resolution", "96"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("phi,z,eta,kind,curve\n"));
    assert!(text.lines().any(|l| l.contains(",separatrix,")));
    assert!(text.lines().any(|l| l.contains(",below_separatrix,")));
}
