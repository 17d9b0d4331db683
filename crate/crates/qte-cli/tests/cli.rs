//! End-to-end runs of the `qte-audit` binary.

use std::process::{Command, Output};

fn qte_audit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qte-audit")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_shows_every_case() {
    let o = qte_audit(&["list"]);
    assert!(o.status.success());
    let text = stdout(&o);
    for i in 1..=21 {
        assert!(text.contains(&format!("T{i:02}")), "missing T{i:02}");
    }
    let json: serde_json::Value = serde_json::from_slice(&qte_audit(&["list", "--format", "json"]).stdout).unwrap();
    assert_eq!(json.as_array().unwrap().len(), 21);
}

#[test]
fn passing_case_exits_zero_with_json_report() {
    let o = qte_audit(&["run", "--case", "T16", "--seed", "1", "--format", "json"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let report = if v.is_array() { v[0].clone() } else { v };
    assert_eq!(report["case"], "T16");
    assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true));
}

#[test]
fn csv_report_written_to_file() {
    let dir = std::env::temp_dir().join(format!("qte-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("t02.csv");
    let o = qte_audit(&["run", "--case", "T02", "--trials", "10", "--format", "csv", "--out", path.to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(&path).unwrap();
    assert!(csv.starts_with("case,check,kind,lhs,rhs,slack,tolerance,pass"));
    assert!(csv.lines().count() > 1);
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn cap_failure_exits_nonzero() {
    let o = qte_audit(&["run", "--case", "T18", "--dim-cap", "4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("error"));
}

#[test]
fn unknown_case_is_a_usage_error() {
    let o = qte_audit(&["run", "--case", "T99"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn scheme_eval_metrics() {
    let eps = qte_audit(&["scheme", "eval", "--expr", "star(otp_accept, triv_reject)", "--metric", "eps"]);
    assert!(eps.status.success());
    let v: serde_json::Value = serde_json::from_slice(&eps.stdout).unwrap();
    assert_eq!(v["eps"].as_f64().unwrap(), 0.0);

    let alpha = qte_audit(&["scheme", "eval", "--expr", "id_accept", "--metric", "alpha"]);
    let v: serde_json::Value = serde_json::from_slice(&alpha.stdout).unwrap();
    assert!((v["alpha"].as_f64().unwrap() - 1.0).abs() < 1e-10);

    let prof = qte_audit(&["scheme", "eval", "--expr", "triv_reject", "--metric", "profile", "--attack", "bitflip"]);
    let v: serde_json::Value = serde_json::from_slice(&prof.stdout).unwrap();
    assert_eq!(v["max_distance"].as_f64().unwrap(), 0.0);
}

#[test]
fn bad_expression_is_a_usage_error() {
    let o = qte_audit(&["scheme", "eval", "--expr", "teleport(", "--metric", "eps"]);
    assert_eq!(o.status.code(), Some(2));
}
