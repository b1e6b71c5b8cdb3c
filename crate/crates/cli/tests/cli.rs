use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bcalc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcalc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.push("--json");
    let out = bcalc(&all);
    let v = serde_json::from_slice(&out.stdout).expect("JSON on stdout");
    (out.status.code().unwrap(), v)
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

const SMOOTH: &str = r#"{"generators": [{"re": "0", "p": 0}]}"#;

#[test]
fn extended_union_table() {
    let dir = tempfile::tempdir().unwrap();
    let s = write(dir.path(), "smooth.json", SMOOTH);
    let out = bcalc(&["indexset", "extunion", &s, &s, "--truncate", "5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("generators: ⟨(0, 1)⟩"));
    let (code, v) = json(&["indexset", "extunion", &s, &s, "--truncate", "5"]);
    assert_eq!(code, 0);
    let members = v["members"].as_array().unwrap();
    assert_eq!(members.len(), 12);
    for (i, m) in members.iter().enumerate() {
        assert_eq!(m["re"], (i / 2).to_string());
        assert_eq!(m["p"], (i % 2) as u64);
    }
}

#[test]
fn workspace_names_resolve() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "smooth.json", SMOOTH);
    let ws = dir.path().to_str().unwrap();
    let (code, v) = json(&[
        "--workspace",
        ws,
        "indexset",
        "sum",
        "smooth",
        "builtin:logs1",
        "--truncate",
        "0",
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["generators"][0]["p"], 1);
}

#[test]
fn blowdown_is_not_a_b_fibration() {
    let (code, v) = json(&["map", "check-bfibration", "builtin:blowdown_x2b"]);
    assert_eq!(code, 2);
    assert_eq!(v["violating_faces"], serde_json::json!(["ff"]));
    let out = bcalc(&["map", "check-bfibration", "builtin:lifted_projection_3"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn malformed_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.json", r#"{"generators": [{"re": "x"}]}"#);
    assert_eq!(bcalc(&["indexset", "inf", &bad]).status.code(), Some(1));
    assert_eq!(
        bcalc(&["indexset", "inf", "missing.json"]).status.code(),
        Some(1)
    );
    assert_eq!(
        bcalc(&["verify", "--suite", "nonsense"]).status.code(),
        Some(1)
    );
}

#[test]
fn push_forward_reports_logs_and_integrability() {
    let dir = tempfile::tempdir().unwrap();
    let good = write(
        dir.path(),
        "fam.json",
        r#"{"lb": {"generators": [{"re": "0", "p": 0}]}, "ff": {"generators": [{"re": "0", "p": 0}]}, "rb": {"generators": [{"re": "1", "p": 0}]}}"#,
    );
    let (code, v) = json(&[
        "transport",
        "pushforward",
        "builtin:projection_x2b_left",
        &good,
    ]);
    assert_eq!(code, 0);
    assert_eq!(v["log_sources"], serde_json::json!(["ff∩lb"]));
    let bad = write(
        dir.path(),
        "fam0.json",
        r#"{"lb": {"generators": [{"re": "0", "p": 0}]}, "ff": {"generators": [{"re": "0", "p": 0}]}, "rb": {"generators": [{"re": "0", "p": 0}]}}"#,
    );
    let (code, v) = json(&[
        "transport",
        "pushforward",
        "builtin:projection_x2b_left",
        &bad,
    ]);
    assert_eq!(code, 2);
    assert_eq!(v["violating_bhs"], serde_json::json!(["rb"]));
}

#[test]
fn descriptor_composition_hypothesis() {
    let dir = tempfile::tempdir().unwrap();
    let p = write(
        dir.path(),
        "p.json",
        r#"{"order": -1, "e_lb": {"generators": []}, "e_rb": {"generators": [{"re": "1", "p": 0}]}}"#,
    );
    let (code, v) = json(&["op", "compose", &p, &p]);
    assert_eq!(code, 0);
    assert_eq!(
        v["e_rb"]["generators"][0],
        serde_json::json!({"re": "1", "im": "0", "p": 1})
    );
    let q = write(
        dir.path(),
        "q.json",
        r#"{"order": 0, "e_lb": {"generators": [{"re": "-1", "p": 0}]}, "e_rb": {"generators": []}}"#,
    );
    assert_eq!(bcalc(&["op", "compose", &p, &q]).status.code(), Some(2));
}

#[test]
fn operator_commands() {
    let dir = tempfile::tempdir().unwrap();
    // (x∂ₓ)² (x∂ₓ + 1)
    let op = write(dir.path(), "op.json", r#"[["0"], ["0"], ["1"], ["1"]]"#);
    let (code, v) = json(&["op", "specb", &op]);
    assert_eq!(code, 0);
    let spec: Vec<(String, u64)> = v["spec_b"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| {
            (
                e["re"].as_str().unwrap().to_string(),
                e["p"].as_u64().unwrap(),
            )
        })
        .collect();
    assert_eq!(
        spec,
        [
            ("-1".to_string(), 0),
            ("0".to_string(), 0),
            ("0".to_string(), 1)
        ]
    );
    let (code, v) = json(&["op", "split", &op, "--gamma", "-1/2"]);
    assert_eq!(code, 0);
    assert_eq!(v["e_rb"]["generators"][0]["re"], "1");
    let first = write(dir.path(), "first.json", r#"[["1"], ["1"]]"#);
    let (code, v) = json(&["op", "apply-check", &first, "--gamma", "0"]);
    assert_eq!(code, 0);
    assert!(v["max_residual"].as_f64().unwrap() < 1e-6);
    assert_eq!(
        bcalc(&["op", "split", &first, "--gamma", "-1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_all_passes() {
    let (code, v) = json(&["verify", "--suite", "all"]);
    assert_eq!(code, 0, "{v:#}");
    assert_eq!(v["failed"], 0);
    assert_eq!(v["cases"].as_array().unwrap().len(), 13);
    let (_, v) = json(&["verify", "--suite", "pushforward"]);
    assert!(v["cases"]
        .as_array()
        .unwrap()
        .iter()
        .all(|c| c["suite"] == "pushforward"));
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["verify", "--suite", "parametrix", "--json"][..],
        &["space", "triple"][..],
        &[
            "map",
            "compose",
            "builtin:lifted_projection_1",
            "builtin:blowdown_x2b",
            "--json",
        ][..],
    ] {
        let a = bcalc(args);
        let b = bcalc(args);
        assert_eq!(a.stdout, b.stdout);
        assert_eq!(a.status.code(), Some(0));
    }
}
