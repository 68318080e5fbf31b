use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn qfim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qfim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(args: &[&str]) -> Value {
    let out = qfim(args);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON report")
}

fn entry(r: &Value, name: &str, i: usize, j: usize) -> (f64, f64) {
    let z = &r["matrices"][name][i][j];
    (z[0].as_f64().unwrap(), z[1].as_f64().unwrap())
}

fn scalar(r: &Value, name: &str) -> f64 {
    r["scalars"][name].as_f64().unwrap_or_else(|| panic!("missing scalar {name}"))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn single_mode_sqfim() {
    let r = report(&["qfim"]);
    assert_eq!(r["command"], "qfim");
    let (j, _) = entry(&r, "j", 0, 0);
    let (q_re, q_im) = entry(&r, "q", 0, 0);
    assert!(close(j, 2.0, 1e-6), "J = {j}");
    assert!(close(q_re, 0.0, 1e-6) && close(q_im, 0.0, 1e-6));
    assert!(close(scalar(&r, "determinant"), 4.0, 1e-5));
    assert!(r["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn balanced_key_is_refused_but_reported() {
    let r = report(&["qfim", "--key", "1,0,1,0"]);
    assert!(scalar(&r, "determinant").abs() < 1e-8);
    let notes = r["diagnostics"].to_string();
    assert!(notes.contains("refused"), "{notes}");
}

#[test]
fn balanced_key_crb_is_a_numerical_failure() {
    let out = qfim(&["crb", "--key", "1,0,1,0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("singular"));
}

#[test]
fn single_mode_bounds() {
    let r = report(&["crb"]);
    assert!(close(scalar(&r, "w_s"), 1.0, 1e-5));
    assert!(close(scalar(&r, "w_r"), 2.0, 1e-5));
    let right = report(&["crb", "--kind", "right"]);
    let (b00, _) = entry(&right, "covariance_bound", 0, 0);
    let (b11, _) = entry(&right, "covariance_bound", 1, 1);
    assert!(close(b00, 1.0, 1e-5) && close(b11, 0.0, 1e-8));
    assert!(right["diagnostics"].to_string().contains("rank 1 of 2"));
}

#[test]
fn two_mode_bound_is_quarter_identity() {
    let r = report(&["crb", "--model", "coherent-2mode", "--z", "0.7,0.2"]);
    for i in 0..2 {
        for j in 0..2 {
            let (re, im) = entry(&r, "covariance_bound", i, j);
            let want = if i == j { 0.25 } else { 0.0 };
            assert!(close(re, want, 1e-6) && close(im, 0.0, 1e-6), "({i},{j}) = {re}+{im}i");
        }
    }
}

#[test]
fn qubit_right_qfim_matches_real_route() {
    let r = report(&["qfim", "--model", "qubit-test", "--kind", "right", "--z", "0.2,-0.1"]);
    let checks = r["checks"].as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["pass"] == true));
}

#[test]
fn map_identities_pass_and_corrupt_map_fails() {
    let r = report(&["verify-map", "--trials", "20"]);
    assert_eq!(r["checks"].as_array().unwrap().len(), 9);
    let out = qfim(&["verify-map", "--trials", "5", "--corrupt-map"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed"));
}

#[test]
fn configuration_errors_exit_two() {
    assert_eq!(qfim(&["verify-map", "--trials", "0"]).status.code(), Some(2));
    assert_eq!(qfim(&["qfim", "--model", "nope"]).status.code(), Some(2));
    assert_eq!(qfim(&["qfim", "--model", "qubit-test", "--mixing", "0.1"]).status.code(), Some(2));
    assert_eq!(qfim(&["qfim", "--mixing", "1.5"]).status.code(), Some(2));
    assert_eq!(qfim(&["qfim", "--fd-step", "-1"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"modle": "qubit-test"}"#).unwrap();
    let out = qfim(&["qfim", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("modle"));
}

#[test]
fn pure_state_on_density_route_is_rank_deficient() {
    let out = qfim(&["qfim", "--route", "density"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("hint"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(&path, r#"{"model": "coherent-2mode", "z": [0.7, 0.2], "seed": 9}"#).unwrap();
    let out_path = dir.path().join("report.json");
    let out = qfim(&[
        "qfim",
        "--config",
        path.to_str().unwrap(),
        "--z",
        "0.1,0",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["inputs"]["model"], "coherent-2mode");
    assert_eq!(r["inputs"]["z"][0].as_f64(), Some(0.1));
}

fn simulate_to(dir: &Path, tag: &str, seed: &str) -> (Vec<u8>, String) {
    let csv = dir.join(format!("{tag}.csv"));
    let out = qfim(&[
        "simulate",
        "--model",
        "coherent-2mode",
        "--z",
        "0.7,0.2",
        "--shots",
        "4000",
        "--seed",
        seed,
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    (out.stdout, std::fs::read_to_string(csv).unwrap())
}

#[test]
fn simulation_is_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, csv_a) = simulate_to(dir.path(), "a", "5");
    let (b, csv_b) = simulate_to(dir.path(), "b", "5");
    let (c, _) = simulate_to(dir.path(), "c", "6");
    assert_eq!(csv_a, csv_b);
    let strip = |bytes: &[u8]| {
        let mut v: Value = serde_json::from_slice(bytes).unwrap();
        v["inputs"].as_object_mut().unwrap().remove("csv");
        v
    };
    assert_eq!(strip(&a), strip(&b));
    assert_ne!(strip(&a), strip(&c));

    let mut lines = csv_a.lines();
    assert_eq!(lines.next(), Some("shot,mode,outcome"));
    assert_eq!(lines.count(), 8000);
    assert!(!csv_a.contains('\r'));
}

#[test]
fn simulation_flags_non_saturation() {
    let r = report(&["simulate", "--model", "coherent-2mode", "--z", "0.7,0.2", "--shots", "20000"]);
    assert!(close(scalar(&r, "saturation_margin"), 2.0, 1e-6));
    assert!(r["diagnostics"].to_string().contains("FLAGGED"));
    let (m_re, m_im) = (scalar(&r, "estimate_mean_re"), scalar(&r, "estimate_mean_im"));
    assert!(close(m_re, 0.7, 0.03) && close(m_im, 0.2, 0.03));
}

#[test]
fn few_shots_warn() {
    let r = report(&["simulate", "--shots", "10"]);
    assert!(r["diagnostics"].to_string().contains("only 10 shots"));
}

#[test]
fn demo_passes_its_closed_form_checks() {
    let r = report(&["demo-coherent"]);
    assert!(close(scalar(&r, "single_mode.determinant"), 2.25, 1e-5));
    assert!(r["checks"].as_array().unwrap().len() >= 8);
}
