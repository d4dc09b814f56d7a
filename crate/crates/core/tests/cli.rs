use std::path::Path;
use std::process::{Command, Output};

fn litmus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_litmus"))
        .args(args)
        .env_remove("LITMUS_AFFINITY")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn run_json(selector: &str, path: &Path) -> Output {
    litmus(&[
        "run",
        selector,
        "--batch-size",
        "2000",
        "--rounds",
        "2",
        "--format",
        "json",
        "--output",
        path.to_str().unwrap(),
    ])
}

#[test]
fn run_then_compare_with_itself() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.json");
    let o = run_json("mp.seqcst", &p);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = std::fs::read_to_string(&p).unwrap();
    assert!(text.contains("\"schema\": 1"));
    assert!(text.contains("\"totalCount\": 4000"));

    let o = litmus(&["compare", p.to_str().unwrap(), p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("no discrepancies"));
}

#[test]
fn compare_reports_discrepancies_with_exit_4() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    assert_eq!(run_json("sb.seqcst", &a).status.code(), Some(0));
    // Forge an extra forbidden outcome in a copy.
    let mut doc: serde_json::Value = serde_json::from_slice(&std::fs::read(&a).unwrap()).unwrap();
    let total = doc["totalCount"].as_u64().unwrap();
    doc["entries"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!({"outcome": [0, 0], "type": "FORBIDDEN", "count": 1}));
    doc["totalCount"] = (total + 1).into();
    doc["overallStatus"] = "FORBIDDEN".into();
    let b = dir.path().join("b.json");
    std::fs::write(&b, serde_json::to_vec(&doc).unwrap()).unwrap();

    let o = litmus(&["compare", a.to_str().unwrap(), b.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    let out = stdout(&o);
    let first = out.lines().next().unwrap();
    assert!(first.contains("status differs"), "{out}");
    assert!(out.contains("(0, 0)"), "{out}");
}

#[test]
fn text_run_prints_table() {
    let o = litmus(&["run", "corr.*", "--batch-size", "500", "--rounds", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("test: corr.relaxed"));
    assert!(out.contains("test: corr.cse"));
    assert!(out.contains("total count: 500, overall status: ACCEPTABLE"));
}

#[test]
fn list_oracle_and_errors() {
    let o = litmus(&["list"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 14);

    let o = litmus(&["oracle", "sb.relaxed", "--model", "tso"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("(0, 0)"));

    assert_eq!(litmus(&["run", "nope.*"]).status.code(), Some(1));
    assert_eq!(
        litmus(&["run", "sb.relaxed", "--batch-size", "0"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(litmus(&["bogus"]).status.code(), Some(1));
}

#[test]
fn garbage_report_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"schema\": 99}").unwrap();
    let o = litmus(&["compare", bad.to_str().unwrap(), bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("99"));
}
