//! End-to-end command tests against the shipped fixture documents.

use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn latmax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_latmax"))
        .args(args)
        .output()
        .expect("binary runs")
}

#[test]
fn analyze_fix1_reports_expected_counts() {
    let out = latmax(&["analyze", fixture("fix1.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["complex"]["vertex_count"], 2);
    assert_eq!(report["complex"]["maximal_count"], 2);
    assert_eq!(report["complex"]["dimension"], 1);
    assert_eq!(report["graph"]["edges"].as_array().unwrap().len(), 2);
    assert_eq!(report["graph"]["strongly_connected"], true);
    for v in report["verdicts"].as_array().unwrap() {
        assert_eq!(v["pass"], true, "verdict {} failed", v["name"]);
    }
    // reports embed the reproducibility metadata
    assert_eq!(report["meta"]["precision"], 16);
    assert_eq!(report["meta"]["spec_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn analyze_is_byte_identical_across_runs() {
    let path = fixture("fix1.json");
    let a = latmax(&["analyze", path.to_str().unwrap()]);
    let b = latmax(&["analyze", path.to_str().unwrap()]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn check_fix2_exits_zero() {
    let out = latmax(&["check", fixture("fix2.json").to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn dot_exports() {
    let out = latmax(&["complex", fixture("fix3.json").to_str().unwrap()]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("graph invariant_complex"));
    let out = latmax(&["graph", fixture("fix3.json").to_str().unwrap()]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("digraph extension_graph"));
    assert!(text.contains("W0 -> W1"));
    assert!(text.contains("W1 -> W0"));
}

#[test]
fn maximal_traces_the_ascent() {
    let out = latmax(&[
        "maximal",
        fixture("fix1.json").to_str().unwrap(),
        "--vector",
        "1,0",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("step 0"));
    assert!(text.contains("step 1"));
    assert!(text.contains("maximal vertex: [1,0;2,3]"));
}

#[test]
fn parse_errors_exit_2() {
    let dir = std::env::temp_dir().join("latmax-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let bad = dir.join("bad.json");
    std::fs::write(&bad, r#"{"ring": {}, "generators": []}"#).unwrap();
    let out = latmax(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("ring.p"));
}

#[test]
fn unbounded_orbit_exits_4() {
    let dir = std::env::temp_dir().join("latmax-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let unbounded = dir.join("unbounded.json");
    std::fs::write(
        &unbounded,
        r#"{"ring": {"p": 3}, "generators": [{"label": "g", "matrix": [[3, 0], [0, 1]]}]}"#,
    )
    .unwrap();
    let out = latmax(&["analyze", unbounded.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unbounded orbit"));
}

#[test]
fn guards_exit_4() {
    let dir = std::env::temp_dir().join("latmax-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    // a depth-2 complex against a diameter guard of 1
    let deep = dir.join("deep.json");
    std::fs::write(
        &deep,
        r#"{"ring": {"p": 3}, "generators": [{"label": "g", "matrix": [[1, 1], [27, 1]]}]}"#,
    )
    .unwrap();
    let out = latmax(&["analyze", deep.to_str().unwrap(), "--max-diameter", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("possibly reducible"));
    // an enumeration cap too small for the reduction
    let capped = dir.join("capped.json");
    std::fs::write(
        &capped,
        r#"{"ring": {"p": 3}, "enumeration_cap": 2,
            "generators": [{"label": "g", "matrix": [[1, 1], [27, 1]]}]}"#,
    )
    .unwrap();
    let out = latmax(&["analyze", capped.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("cap"));
}

#[test]
fn out_flag_writes_file() {
    let dir = std::env::temp_dir().join("latmax-cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    let target = dir.join("report.json");
    let out = latmax(&[
        "analyze",
        fixture("fix2.json").to_str().unwrap(),
        "--out",
        target.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let body = std::fs::read_to_string(&target).unwrap();
    assert!(body.contains("\"vertex_count\": 1"));
}
