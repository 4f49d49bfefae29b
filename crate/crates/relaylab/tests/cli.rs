//! End-to-end checks of the installed binary: exit codes, CSV shapes and
//! cross-output consistency on the shipped configs.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_relaylab")
}

fn repo_path(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").join(rel)
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn run_with_config(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    Command::new(bin())
        .arg(sub)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn help_version_and_usage_exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["--version"]).status.code(), Some(0));
    assert_eq!(run(&["sim", "--help"]).status.code(), Some(0));
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["solve", "--config"]).status.code(), Some(1));
    let out = run(&["solve", "--config", "/nonexistent.json"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!out.stderr.is_empty(), "errors go to stderr");
}

#[test]
fn solve_nonconvergence_exit_code_via_binary() {
    let dir = tempfile::TempDir::new().unwrap();
    let cfg = dir.path().join("stuck.json");
    std::fs::write(
        &cfg,
        r#"{
            "flows": [
                {"id": 0, "class": "direct", "lambda_r": 1.0, "lambda_a": 1.0},
                {"id": 1, "class": "relayed", "lambda_r": 1.0}
            ],
            "phase": {"alpha": 0.5},
            "solver": {"tolerance": 1e-14, "max_iter": 2, "damping": 0.5}
        }"#,
    )
    .unwrap();
    let out = run_with_config("solve", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn shipped_sweep_is_monotone_in_csv() {
    let dir = tempfile::TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = run_with_config("sweep", &repo_path("configs/sweep_beta.json"), &out_dir, &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    let header = lines.next().unwrap();
    assert_eq!(
        header,
        "beta,theta_flow0_direct,theta_flow1_relayed,residual,iterations,converged"
    );
    let mut prev_direct = f64::INFINITY;
    let mut prev_relayed = f64::NEG_INFINITY;
    let mut rows = 0;
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        let direct: f64 = cells[1].parse().unwrap();
        let relayed: f64 = cells[2].parse().unwrap();
        assert!(direct <= prev_direct + 1e-12);
        assert!(relayed >= prev_relayed - 1e-12);
        assert_eq!(cells[5], "true");
        prev_direct = direct;
        prev_relayed = relayed;
        rows += 1;
    }
    assert_eq!(rows, 25);
}

#[test]
fn map_without_relays_yields_identical_rasters() {
    let dir = tempfile::TempDir::new().unwrap();
    let cfg = dir.path().join("map.json");
    std::fs::write(
        &cfg,
        r#"{
            "geometry": {
                "donor": {"position": {"x": 0.0, "y": 0.0}, "power_dbm": 46.0},
                "users": [{"x": 300.0, "y": 0.0}, {"x": 0.0, "y": 400.0}]
            },
            "cell_size_m": 50.0
        }"#,
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    assert_eq!(run_with_config("map", &cfg, &out_dir, &[]).status.code(), Some(0));
    let active = std::fs::read_to_string(out_dir.join("sinr_relays_active.csv")).unwrap();
    let silent = std::fs::read_to_string(out_dir.join("sinr_relays_silent.csv")).unwrap();
    // Without relays the two scenarios may differ only in the tag line.
    let strip = |s: &str| {
        s.lines()
            .skip(2)
            .map(str::to_owned)
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_ne!(active.lines().nth(1), silent.lines().nth(1));
    assert_eq!(strip(&active), strip(&silent));
}

#[test]
fn sim_trace_mcs_column_is_empty_when_unserved() {
    let dir = tempfile::TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = run_with_config("sim", &repo_path("configs/sim_bddduu.json"), &out_dir, &[]);
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("trace.csv")).unwrap();
    // The relayed UE reports its relay link every TTI but is served only in
    // U subframes: B/D rows for ue1 end with an empty MCS and zero bytes.
    let unserved: Vec<&str> = csv
        .lines()
        .filter(|l| l.contains(",rn0,ue1,") && (l.contains(",B,") || l.contains(",D,")))
        .collect();
    assert!(!unserved.is_empty());
    for line in &unserved {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[5], "", "mcs must be empty: {line}");
        assert_eq!(cells[6], "0", "bytes must be zero: {line}");
    }
    // And it is served somewhere in U.
    assert!(csv
        .lines()
        .filter(|l| l.contains(",U,rn0,ue1,"))
        .any(|l| l.split(',').nth(6) != Some("0")));
}

#[test]
fn seed_override_changes_sim_output() {
    let dir = tempfile::TempDir::new().unwrap();
    let cfg = repo_path("configs/sim_bddduu.json");
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    assert_eq!(run_with_config("sim", &cfg, &out_a, &[]).status.code(), Some(0));
    assert_eq!(
        run_with_config("sim", &cfg, &out_b, &["--seed", "4242"]).status.code(),
        Some(0)
    );
    let a = std::fs::read_to_string(out_a.join("trace.csv")).unwrap();
    let b = std::fs::read_to_string(out_b.join("trace.csv")).unwrap();
    assert_ne!(a, b);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_b.join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["resolved_config"]["seed"], 4242);
}

#[test]
fn compare_csv_shows_direct_mcs_uplift_in_d() {
    let dir = tempfile::TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let out = run_with_config(
        "compare",
        &repo_path("configs/compare_plans.json"),
        &out_dir,
        &[],
    );
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(out_dir.join("comparison.csv")).unwrap();
    let mcs_d = csv
        .lines()
        .find(|l| l.starts_with("mean_direct_mcs_d,"))
        .expect("comparison carries the D-subframe MCS row");
    let cells: Vec<&str> = mcs_d.split(',').collect();
    let a: f64 = cells[1].parse().unwrap();
    assert!(cells[2].is_empty(), "plan B has no D subframes");
    let mcs_u_a: f64 = csv
        .lines()
        .find(|l| l.starts_with("mean_direct_mcs_u,"))
        .unwrap()
        .split(',')
        .nth(1)
        .unwrap()
        .parse()
        .unwrap();
    assert!(
        a > mcs_u_a,
        "plan A direct MCS should be higher in D ({a}) than U ({mcs_u_a})"
    );
}
