use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn qpsoc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpsoc"))
        .args(args)
        .env("QPSOC_ADAPTER", "clarabel")
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let out = qpsoc(&all);
    let value = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), value)
}

#[test]
fn graph_summary() {
    let out = qpsoc(&["graph", &fixture("triangle_plus.json")]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("V=3 E=3 L+=1 L-=0 stable+=true"), "{text}");
}

#[test]
fn check_td_flags_an_invalid_decomposition() {
    let (code, report) = json(&[
        "check-td",
        &fixture("triangle_plus.json"),
        "--td",
        &fixture("bad_td.json"),
    ]);
    assert_eq!(code, 1);
    assert_eq!(report["td"]["valid"], false);
    let (code, report) = json(&[
        "check-td",
        &fixture("triangle_plus.json"),
        "--td",
        &fixture("triangle_td.json"),
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["td"]["valid"], true);
}

#[test]
fn exact_then_solve_matches_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    let model = model.to_str().unwrap();
    let (code, report) = json(&["exact", &fixture("cycle6.json"), "--out", model]);
    assert_eq!(code, 0, "{report}");
    assert_eq!(
        report["formulation"]["block_inequalities"],
        report["formulation"]["predicted_inequalities"]
    );

    let (code, solved) = json(&["solve", model]);
    assert_eq!(code, 0);
    assert_eq!(solved["status"], "optimal");
    let (_, oracle) = json(&["oracle", &fixture("cycle6.json")]);
    let gap = oracle["oracle"].as_f64().unwrap() - solved["bound"].as_f64().unwrap();
    assert!(gap.abs() <= 1e-5, "gap {gap}");
}

#[test]
fn relax_writes_a_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("relaxed.json");
    let (code, report) = json(&[
        "relax",
        &fixture("triangle_plus.json"),
        "-r",
        "3",
        "--out",
        model.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert_eq!(report["relaxation"]["support_inequalities"], 8);
    assert!(model.exists());
}

#[test]
fn exact_refuses_adjacent_plus_loops() {
    let out = qpsoc(&["exact", &fixture("triangle_two_plus.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    let out = qpsoc(&["exact", &fixture("triangle_two_plus.json"), "--fallback-level", "3"]);
    assert!(out.status.success());
}

#[test]
fn compare_asserts_the_gap() {
    let (code, report) = json(&["compare", &fixture("path_plus_mid.json"), "--assert-gap", "1e-5"]);
    assert_eq!(code, 0, "{report}");
    assert!(report["gap"].as_f64().unwrap().abs() <= 1e-5);

    // the single-window hierarchy is loose on the two-plus triangle
    let (code, report) = json(&[
        "compare",
        &fixture("triangle_two_plus.json"),
        "--mode",
        "hierarchy",
        "-r",
        "1",
        "--assert-gap",
        "0",
    ]);
    let gap = report["gap"].as_f64().unwrap();
    assert_eq!(code, if gap > 1e-6 { 1 } else { 0 });
    assert!(gap >= -1e-6);
}

#[test]
fn witness_separates() {
    let (code, report) = json(&["witness"]);
    assert_eq!(code, 0);
    assert_eq!(report["witness"]["lhs"], 0.1875);
    assert_eq!(report["witness"]["rhs"], 0.25);
}

#[test]
fn unknown_adapter_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("m.json");
    qpsoc(&[
        "relax",
        &fixture("single.json"),
        "-r",
        "1",
        "--out",
        model.to_str().unwrap(),
    ]);
    let out = qpsoc(&["solve", model.to_str().unwrap(), "--adapter", "nope"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_instance() {
    let (code, report) = json(&["compare", &fixture("empty.json")]);
    assert_eq!(code, 0);
    assert_eq!(report["bound"], 0.0);
}
