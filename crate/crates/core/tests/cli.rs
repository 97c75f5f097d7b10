use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(name)
        .display()
        .to_string()
}

fn meaning(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_meaning")).args(args).output().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn json_lines(out: &Output) -> Vec<Value> {
    stdout(out).lines().map(|l| serde_json::from_str(l).unwrap()).collect()
}

#[test]
fn language_lists_six_statements() {
    let v3 = scenario("v3.yaml");
    for extra in [&[][..], &["--oracle"][..]] {
        let mut args = vec!["language", "--scenario", &v3];
        args.extend_from_slice(extra);
        let out = meaning(&args);
        assert_eq!(out.status.code(), Some(0));
        let lines = json_lines(&out);
        assert_eq!(lines.len(), 7);
        let rows: Vec<&Value> = lines[..6].iter().map(|l| &l["statement"]).collect();
        assert_eq!(rows[0], &serde_json::json!([]));
        assert_eq!(rows[5], &serde_json::json!([1, 3]));
        assert_eq!(lines[6]["summary"]["count"], 6);
        assert_eq!(lines[6]["summary"]["config"]["oracle"], !extra.is_empty());
    }
    let csv = stdout(&meaning(&["language", "--scenario", &v3, "--format", "csv"]));
    assert_eq!(csv.lines().next(), Some("index,statement"));
    assert_eq!(csv.lines().nth(5), Some("4,1 2"));
}

#[test]
fn models_of_a_named_task() {
    let v3 = scenario("v3.yaml");
    let text = stdout(&meaning(&["models", "--scenario", &v3, "--task", "example", "--format", "text"]));
    assert_eq!(text, "{2}\n{1,2}\n2 models of example\n");
    let oracle = stdout(&meaning(&["models", "--scenario", &v3, "--task", "example", "--format", "text", "--oracle"]));
    assert_eq!(text, oracle);
}

#[test]
fn interpret_reports_symbol_and_decision() {
    let v3 = scenario("v3.yaml");
    let out = meaning(&["interpret", "--scenario", &v3, "--organism", "a", "--statement", "1"]);
    let lines = json_lines(&out);
    assert_eq!(lines[0]["meaningful"], true);
    assert_eq!(lines[0]["decision"], serde_json::json!([1, 2]));
}

#[test]
fn simulate_echoes_resolved_config() {
    let twins = scenario("twins-v3.yaml");
    let out = meaning(&["simulate", "--scenario", &twins, "--seed", "9", "--max-situations", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let lines = json_lines(&out);
    assert_eq!(lines.len(), 11);
    let summary = &lines[10]["summary"];
    assert_eq!(summary["config"]["seed"], 9);
    assert_eq!(summary["config"]["caps"]["max_situations"], 2);
    assert_eq!(summary["config"]["version"], env!("CARGO_PKG_VERSION"));
    assert!(summary["exhaustive"].is_boolean());
    assert_eq!(summary["metrics"]["steps"], 10);
}

#[test]
fn ascribe_agrees_with_oracle() {
    let twins = scenario("twins-v3.yaml");
    let out = meaning(&["ascribe", "--scenario", &twins, "--listener", "b", "--speaker", "a", "--oracle"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json_lines(&out)[0]["oracle_agrees"], true);
}

#[test]
fn outputs_and_plot_data_go_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.jsonl");
    let plot = dir.path().join("plot.csv");
    let out = meaning(&[
        "experiment",
        "similarity-sweep",
        "--scenario",
        &scenario("twins-v3.yaml"),
        "--seeds",
        "3",
        "--fractions",
        "0,1",
        "--output",
        report.to_str().unwrap(),
        "--emit-plot-data",
        plot.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let csv = std::fs::read_to_string(&plot).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("x,mean,stddev,n"));
    assert_eq!(lines.count(), 2);
    assert_eq!(std::fs::read_to_string(&report).unwrap().lines().count(), 3);
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.yaml");
    std::fs::write(&bad, "states: 4\nseed: [\n").unwrap();
    let bad = bad.to_str().unwrap();
    let v3 = scenario("v3.yaml");
    let mixed = scenario("mixed.yaml");
    let cases: [(&[&str], i32); 7] = [
        (&["language", "--scenario", "/nonexistent.yaml"], 1),
        (&["frobnicate"], 2),
        (&["language", "--scenario", bad], 3),
        (&["language", "--scenario", &v3, "--organism", "ghost"], 4),
        (&["interpret", "--scenario", &v3, "--organism", "a", "--statement", "2,3"], 4),
        (&["ascribe", "--scenario", &v3, "--listener", "a", "--speaker", "a", "--zeta", "example", "--max-tasks", "0"], 5),
        (&["ascribe", "--scenario", &mixed, "--listener", "a", "--speaker", "b"], 6),
    ];
    for (args, code) in cases {
        let out = meaning(args);
        assert_eq!(out.status.code(), Some(code), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(!out.stderr.is_empty());
    }
    let parse = meaning(&["language", "--scenario", bad]);
    assert!(String::from_utf8_lossy(&parse.stderr).contains("line"));
}

#[test]
fn hall_of_mirrors_text_report() {
    let out = meaning(&[
        "experiment",
        "hall-of-mirrors",
        "--scenario",
        &scenario("v3.yaml"),
        "--trials",
        "20",
        "--format",
        "text",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).starts_with("hall of mirrors: 20 trials"));
}
