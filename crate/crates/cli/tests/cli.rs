use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twisted-hodge"))
        .args(args)
        .env("TWISTED_HODGE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (Value, i32) {
    let out = run(args);
    let code = out.status.code().unwrap();
    let v = serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("bad json ({e}) from {args:?}: {}", String::from_utf8_lossy(&out.stderr)));
    (v, code)
}

fn statuses(v: &Value) -> Vec<String> {
    v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| c["status"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn validate_bundled_models() {
    for name in ["torus_n2.json", "kodaira_thurston.json", "hopf_surface"] {
        let (v, code) = json(&["validate", "--model", name]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(v["status"], "pass");
    }
}

#[test]
fn malformed_coefficient_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"name": "bad", "n": 2, "dphi": {"2": [{"bidegree": "(1,1)", "i": 1, "jbar": 1, "coeff": "1/0"}]}}"#,
    )
    .unwrap();
    let out = run(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 1"), "{err}");
}

#[test]
fn failing_model_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("nonunimodular.json");
    std::fs::write(
        &path,
        r#"{"name": "nu", "n": 1, "dphi": {"1": [{"bidegree": "(1,1)", "i": 1, "jbar": 1, "coeff": "1"}]}}"#,
    )
    .unwrap();
    let (v, code) = json(&["validate", "--model", path.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "fail");
}

#[test]
fn unknown_model_is_invalid_input() {
    assert_eq!(run(&["hodge", "--model", "no_such_model"]).status.code(), Some(2));
    assert_eq!(run(&["hodge", "--model", "torus_n2", "--theta", "phi_bar_7"]).status.code(), Some(2));
    assert_eq!(run(&["hodge", "--model", "iwasawa", "--theta", "phi_bar_3"]).status.code(), Some(2));
}

#[test]
fn hodge_tables() {
    let (v, code) = json(&["hodge", "--model", "torus_n2"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["table"]["rows"]["1"], serde_json::json!([2, 4, 2]));
    assert_eq!(v["results"]["chi_y"]["polynomial"], "0");
    let (v, _) = json(&["hodge", "--model", "torus_n2", "--theta", "phi_bar_1"]);
    for row in v["results"]["table"]["rows"].as_object().unwrap().values() {
        assert!(row.as_array().unwrap().iter().all(|d| d == 0));
    }
    let (v, _) = json(&["hodge", "--model", "hopf_surface"]);
    assert_eq!(v["results"]["table"]["rows"]["0"], serde_json::json!([1, 1, 0]));
    assert_eq!(v["results"]["table"]["rows"]["2"], serde_json::json!([0, 1, 1]));
}

#[test]
fn numeric_mode_agrees_with_exact() {
    let (exact, _) = json(&["hodge", "--model", "kodaira_thurston", "--theta", "phi_bar_2"]);
    let (numeric, _) = json(&["hodge", "--model", "kodaira_thurston", "--theta", "phi_bar_2", "--mode", "numeric"]);
    assert_eq!(exact["results"]["table"]["rows"], numeric["results"]["table"]["rows"]);
    assert_eq!(numeric["results"]["table"]["provenance"], "numeric-kernel");
}

#[test]
fn exact_reports_are_deterministic() {
    let a = run(&["hodge", "--model", "kodaira_thurston", "--theta", "phi_bar_1"]);
    let b = run(&["hodge", "--model", "kodaira_thurston", "--theta", "phi_bar_1"]);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_examples() {
    let cases: &[&[&str]] = &[
        &["verify", "--which", "index", "--model", "kodaira_thurston.json", "--theta", "phi_bar_1", "--t", "0,1,5"],
        &["verify", "--which", "3.4", "--torus-n", "1", "--cutoff", "4", "--theta", "2+cos"],
        &["verify", "--which", "A.2", "--model", "torus_n2.json", "--theta", "phi_bar_1"],
        &["verify", "--which", "1.1", "--model", "torus_n2"],
        &["verify", "--which", "3.6", "--model", "kodaira_thurston"],
        &["verify", "--which", "A.1", "--model", "torus_n2"],
        &["verify", "--which", "A.4", "--model", "hopf_surface", "--s-table", "1,0;0,0"],
        &["verify", "--which", "3.3", "--samples", "3"],
        &["verify", "--which", "3.5", "--cutoff", "2"],
    ];
    for args in cases {
        let (v, code) = json(args);
        assert_eq!(code, 0, "{args:?}");
        assert_eq!(v["status"], "pass", "{args:?}");
        assert!(statuses(&v).iter().all(|s| s == "pass"));
    }
}

#[test]
fn real_part_residual_is_small() {
    let (v, _) = json(&["verify", "--which", "real-part", "--torus-n", "1", "--cutoff", "4", "--theta", "2+cos"]);
    assert!(v["results"]["max_residual"].as_f64().unwrap() <= 1e-9);
}

#[test]
fn zero_theta_h00_is_indeterminate_not_pass() {
    let (v, code) = json(&["verify", "--which", "h00", "--model", "torus_n2", "--theta", "0"]);
    assert_eq!(code, 0);
    assert_eq!(v["status"], "indeterminate");
}

#[test]
fn commutator_needs_flat_model() {
    assert_eq!(run(&["verify", "--which", "A.1", "--model", "kodaira_thurston"]).status.code(), Some(2));
}

#[test]
fn scan_constant_theta_csv() {
    let out = run(&["scan", "--torus-n", "1", "--cutoff", "3", "--theta", "2", "--t-grid", "0.1,0.2,0.4", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,sigma_min_even,sigma_min_odd"));
    let values: Vec<f64> = lines
        .clone()
        .take(3)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    // per-mode closed form: min |2t - π k_y| = 2t for t < π/4
    for (v, t) in values.iter().zip([0.1, 0.2, 0.4]) {
        assert!((v - 2.0 * t).abs() < 1e-9);
    }
    assert!(text.trim_end().ends_with("# witness_t=0.1"));
}

#[test]
fn scan_certificate_failure_exits_two() {
    assert_eq!(run(&["scan", "--theta", "cos"]).status.code(), Some(2));
}

#[test]
fn scan_without_witness_is_a_finding() {
    let (v, code) = json(&["scan", "--theta", "2", "--t-grid", "0", "--cutoff", "2", "--no-stability"]);
    assert_eq!(code, 0);
    assert_eq!(v["results"]["summary"]["witness"], Value::Null);
    assert_eq!(v["status"], "indeterminate");
}

#[test]
fn out_flag_and_timing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run(&["validate", "--model", "torus_n1", "--timing", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["timing"]["seconds"].as_f64().unwrap() >= 0.0);
    assert_eq!(v["timing"]["threads"], 2);
}
