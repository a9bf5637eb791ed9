//! Exit-code and artifact contract of the `wavepar` binary:
//! 0 ok, 2 config, 3 numeric, 4 domain (no bounded orbit), 5 verification
//! failure.

use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wavepar"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(path: &Path, contents: &str) {
    std::fs::write(path, contents).unwrap();
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn stopband_outputs_and_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(&cfg, r#"{"profile": {"q0": 1.0, "b": [0.2]}, "psi_nodes": 1024}"#);
    let out = dir.path().join("out");
    let o = run(&[
        "stopband",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());

    let metrics = json(&out.join("metrics.json"));
    let nu = metrics["nu"].as_f64().unwrap();
    assert!((nu - 0.314159265).abs() < 1e-8, "nu {nu}");

    let curve = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    assert!(curve.starts_with("psi,x,re_w,im_w,re_y,im_y\n"));
    let q_csv = std::fs::read_to_string(out.join("profile_q.csv")).unwrap();
    assert!(q_csv.starts_with("x,q,n\n"));
}

#[test]
fn stopband_uniform_medium() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(&cfg, r#"{"profile": {"q0": 2.0}}"#);
    let out = dir.path().join("out");
    let o = run(&[
        "stopband",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let metrics = json(&out.join("metrics.json"));
    assert!(metrics["nu"].as_f64().unwrap().abs() < 1e-12);
    let chi = metrics["spatial_period"].as_f64().unwrap();
    assert!((chi - std::f64::consts::PI / 2.0).abs() < 1e-12);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    write(&cfg, "{not json");
    let o = run(&["stopband", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn family_constant_metrics() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(&cfg, r#"{"family": {"variant": "constant", "c": 3.0}}"#);
    let out = dir.path().join("out");
    let o = run(&[
        "family",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let m = json(&out.join("family_metrics.json"));
    assert!((m["tau"].as_f64().unwrap() - std::f64::consts::PI).abs() < 1e-10);
    assert!(m["chi_inc"].as_f64().unwrap().abs() < 1e-9);
    assert!((m["eta"].as_f64().unwrap().abs() - std::f64::consts::PI).abs() < 1e-9);
    assert!(out.join("c_curve.csv").exists());
    assert!(out.join("w_curve.csv").exists());
}

#[test]
fn family_unbounded_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"family": {"variant": "quadratic_plus", "c": 1.0, "e": 0.1, "k": 2.0}}"#,
    );
    let o = run(&["family", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn family_quartic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(&cfg, r#"{"family": {"variant": "quartic", "a": 0.4, "b": 1.0}}"#);
    let out = dir.path().join("out");
    let o = run(&[
        "family",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let m = json(&out.join("family_metrics.json"));
    assert!(m["chi_inc"].as_f64().unwrap().abs() <= 1e-9);
    assert!(out.join("c_curve.csv").exists());
    assert!(out.join("w_curve.csv").exists());
}

#[test]
fn family_tabulated_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    // Tabulated version of M = 2.5 - 1.6 C^2.
    let mut c_samples = Vec::new();
    let mut m_samples = Vec::new();
    for i in 0..=160 {
        let c = -2.0 + i as f64 * 0.025;
        c_samples.push(c);
        m_samples.push(2.5 - 1.6 * c * c);
    }
    let body = serde_json::json!({
        "family": {
            "variant": "tabulated",
            "c_samples": c_samples,
            "m_samples": m_samples,
        }
    });
    write(&cfg, &body.to_string());
    let out = dir.path().join("out");
    let o = run(&[
        "family",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&out.join("family_metrics.json"));
    // Same orbit as quadratic_minus(2.5, 0, sqrt(1.6)): tau = 2 pi / sqrt(d^2+4).
    let tau_expect = 2.0 * std::f64::consts::PI / (1.6f64 + 4.0).sqrt();
    assert!((m["tau"].as_f64().unwrap() - tau_expect).abs() < 1e-6);
}

#[test]
fn verify_odd_family_rejected_as_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"family": {"variant": "linear", "c": -0.7, "e": 0.1}}"#,
    );
    let o = run(&["verify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn stopband_curve_options_respected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"profile": {"q0": 1.0}, "psi_nodes": 64, "x0": 2.0, "psi0": 0.5, "w0": [2.0, 0.0]}"#,
    );
    let out = dir.path().join("out");
    let o = run(&[
        "stopband",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.join("curve.csv")).unwrap();
    let first = csv.lines().nth(1).unwrap();
    let cols: Vec<f64> = first.split(',').map(|v| v.parse().unwrap()).collect();
    assert!((cols[0] - 0.5).abs() < 1e-15, "psi0");
    assert!((cols[1] - 2.0).abs() < 1e-15, "x0");
    assert!((cols[2] - 2.0 * 0.5f64.sin()).abs() < 1e-12, "w0 scaling");
}

#[test]
fn verify_stopband_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(&cfg, r#"{"profile": {"q0": 1.0, "b": [0.2]}, "psi_nodes": 2048}"#);
    let out = dir.path().join("out");
    let o = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&out.join("verify_report.json"));
    assert_eq!(report["all_pass"], serde_json::Value::Bool(true));
}

#[test]
fn verify_family_passes_at_1e5() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"family": {"variant": "quartic", "a": 0.4, "b": 1.0}, "psi_nodes": 4096}"#,
    );
    let out = dir.path().join("out");
    let o = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--tol",
        "1e-5",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn verify_corrupted_medium_exits_5_with_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"profile": {"q0": 1.0, "b": [0.2]}, "psi_nodes": 1024, "q_perturbation": 0.01}"#,
    );
    let out = dir.path().join("out");
    let o = run(&[
        "verify",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(5));
    // Report still written.
    let report = json(&out.join("verify_report.json"));
    assert_eq!(report["all_pass"], serde_json::Value::Bool(false));
}

#[test]
fn transmission_constant_c() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(&cfg, r#"{"c_spec": {"kind": "constant", "c0": 0.3}}"#);
    let out = dir.path().join("out");
    let o = run(&[
        "transmission",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out.join("transmission.csv")).unwrap();
    assert!(csv.starts_with("psi,c,cdot,g,re_y,im_y,x,re_w,im_w\n"));
}

#[test]
fn transmission_harmonic_minus_branch() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"profile": {"q0": 1.0, "a": [0.2], "b": [0.1]},
            "c_spec": {"kind": "harmonic", "branch": "minus"}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&[
        "transmission",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn transmission_harmonic_requires_profile() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"c_spec": {"kind": "harmonic", "branch": "plus"}}"#,
    );
    let o = run(&["transmission", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn transmission_ode_kind() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"profile": {"q0": 1.0, "a": [0.1], "b": [0.15]},
            "c_spec": {"kind": "ode", "c_init": 0.1, "cdot_init": 0.3},
            "psi_span": [0.0, 6.0]}"#,
    );
    let out = dir.path().join("out");
    let o = run(&[
        "transmission",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn design_single_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"design": {"m_max": 1, "bounds": [[0.0, 0.0], [-0.5, 0.5]],
            "objective": "maximize_nu", "max_evals": 2000, "seed": 7}}"#,
    );
    let out = dir.path().join("out");
    let o = run(&[
        "design",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let profile = json(&out.join("best_profile.json"));
    let b2 = profile["b"][0].as_f64().unwrap();
    assert!((b2 - 0.5).abs() < 1e-9, "b2 {b2}");
    let history = std::fs::read_to_string(out.join("history.csv")).unwrap();
    assert!(history.starts_with("iter,objective,a2,b2\n"));
    // Best-so-far objective column is nondecreasing.
    let mut prev = f64::NEG_INFINITY;
    for line in history.lines().skip(1) {
        let obj: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(obj >= prev);
        prev = obj;
    }
}

#[test]
fn design_invalid_bounds_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(
        &cfg,
        r#"{"design": {"m_max": 2, "bounds": [[0.0, 0.0]],
            "objective": "maximize_nu", "max_evals": 100, "seed": 1}}"#,
    );
    let o = run(&["design", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn threads_flag_validated() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    write(&cfg, r#"{"profile": {"q0": 1.0}}"#);
    let o = run(&[
        "stopband",
        "--config",
        cfg.to_str().unwrap(),
        "--threads",
        "0",
    ]);
    assert_eq!(o.status.code(), Some(2));
}
