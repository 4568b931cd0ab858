use std::process::Command;

use floquet_cli::{read_csv, trajectory_curves, PointConfig};
use floquet_core::model::DriveParams;

fn floquet() -> Command {
    Command::new(env!("CARGO_BIN_EXE_floquet"))
}

#[test]
fn point_prints_one_row() {
    let out = floquet()
        .args(["point", "--omega", "1.5", "--e", "1.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let rows = read_csv(&out.stdout[..]).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(rows[0].exists);
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sweep.toml");
    std::fs::write(
        &cfg,
        "gamma = 0.03\nphi = 0.5\n[omega_range]\nmin = 1.0\nmax = 1.4\ncount = 2\n[e_range]\nmin = 0.5\nmax = 0.5\ncount = 1\n",
    )
    .unwrap();
    let out = floquet()
        .args(["phase-diagram", "--config"])
        .arg(&cfg)
        .args(["--gamma", "0.02"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = read_csv(&out.stdout[..]).unwrap();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r.gamma == 0.02 && r.phi == 0.5 && r.e == 0.5));
}

#[test]
fn config_errors_exit_nonzero() {
    let bad_range = floquet()
        .args(["phase-diagram", "--omega-range", "1:2"])
        .output()
        .unwrap();
    assert!(!bad_range.status.success());
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "gama = 0.1\n").unwrap();
    let unknown_key = floquet()
        .args(["phase-diagram", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert!(!unknown_key.status.success());
    let missing_point = floquet().args(["point", "--omega", "1.0"]).output().unwrap();
    assert!(!missing_point.status.success());
    let missing_file = floquet()
        .args(["point", "--config", "/nonexistent/x.toml"])
        .output()
        .unwrap();
    assert!(!missing_file.status.success());
}

#[test]
fn extract_reports_generator_parts() {
    let out = floquet()
        .args(["extract", "--omega", "1.5", "--e", "1.5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["exists"], true);
    assert_eq!(v["h_f"]["re"].as_array().unwrap().len(), 2);
    assert!(!v["jumps_f"].as_array().unwrap().is_empty());
    assert_eq!(v["kernel"]["tau_min"], 0.0);
}

#[test]
fn trajectory_has_three_curves() {
    let p = DriveParams::new(0.75, 1.2, 0.0, 0.01).unwrap();
    let period = p.period();
    let pts = trajectory_curves(&p, &PointConfig::default(), 2.0 * period, 41, None).unwrap();
    for curve in ["full", "semigroup", "kernel"] {
        let n = pts.iter().filter(|q| q.curve == curve).count();
        assert_eq!(n, 41 * 4, "{curve}");
    }
    // the exact evolution is completely positive throughout
    let lo = pts
        .iter()
        .filter(|q| q.curve == "full")
        .map(|q| q.value)
        .fold(f64::INFINITY, f64::min);
    assert!(lo > -1e-9);
    // the kernel evolution reproduces the map at t = T
    let at = |curve: &str, t: f64| {
        let mut v: Vec<f64> = pts
            .iter()
            .filter(|q| q.curve == curve && (q.t - t).abs() < 1e-9 * period)
            .map(|q| q.value)
            .collect();
        v.sort_by(f64::total_cmp);
        v
    };
    for (a, b) in at("full", period).iter().zip(at("kernel", period)) {
        assert!((a - b).abs() < 1e-8);
    }

    let out = floquet()
        .args(["trajectory", "--omega", "1.2", "--e", "0.75", "--samples", "5"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,curve,eigenvalue_index,value"));
    assert_eq!(lines.count(), 3 * 5 * 4);
}
