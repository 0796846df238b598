//! End-to-end tests of the `corpusgate` binary: exit codes, artifacts and
//! re-aggregation stability.

use std::path::Path;
use std::process::{Command, Output};

fn corpusgate(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_corpusgate"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary should spawn")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn synth_small(dir: &Path) {
    let out = corpusgate(
        &[
            "synth", "--out", ".", "--topics", "12", "--train", "8", "--test", "5", "--dim", "64",
        ],
        dir,
    );
    assert_eq!(out.status.code(), Some(0), "synth failed: {}", stderr(&out));
    for file in ["config.json", "corpus.jsonl", "train.jsonl", "test.jsonl"] {
        assert!(dir.join(file).exists(), "missing {file}");
    }
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = corpusgate(&["--help"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("Usage"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = corpusgate(&["run", "--bogus", "x"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_config_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = corpusgate(&["run", "--config", "no-such-file.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("error:"));
}

#[test]
fn run_produces_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let out = corpusgate(&["run", "--config", "config.json"], dir.path());
    assert_eq!(out.status.code(), Some(0), "run failed: {}", stderr(&out));
    assert!(stdout(&out).contains("run complete"));

    let report_path = dir.path().join("runs").join("report.json");
    let raw = std::fs::read_to_string(report_path).unwrap();
    let report: serde_json::Value = serde_json::from_str(&raw).unwrap();
    assert_eq!(report["status"], "complete");
    // The synthesized config runs the frozen-corpus mode.
    assert_eq!(report["aggregates"]["growth"], 0);
    let csv = std::fs::read_to_string(dir.path().join("runs").join("per_query.csv")).unwrap();
    assert_eq!(
        csv.lines().count(),
        1 + 8 + 5,
        "header plus one row per query"
    );
}

#[test]
fn sweep_writes_all_runs_and_report_reaggregates_identically() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let out = corpusgate(
        &["sweep", "--config", "config.json", "--seeds", "42"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "sweep failed: {}", stderr(&out));

    let runs = dir.path().join("runs");
    for mode in ["standard", "naive", "bidirectional"] {
        assert!(
            runs.join(format!("{mode}-seed42"))
                .join("report.json")
                .exists(),
            "missing report for {mode}"
        );
    }
    let aggregate = runs.join("aggregate.csv");
    let from_sweep = std::fs::read(&aggregate).unwrap();
    assert!(!from_sweep.is_empty());

    let out = corpusgate(&["report", "--dir", "runs"], dir.path());
    assert_eq!(
        out.status.code(),
        Some(0),
        "report failed: {}",
        stderr(&out)
    );
    let from_report = std::fs::read(&aggregate).unwrap();
    assert_eq!(from_sweep, from_report, "re-aggregation changed the CSV");
}

#[test]
fn unreachable_backend_exits_two_and_leaves_partial_report() {
    let dir = tempfile::tempdir().unwrap();
    synth_small(dir.path());
    let raw = std::fs::read_to_string(dir.path().join("config.json")).unwrap();
    let mut config: serde_json::Value = serde_json::from_str(&raw).unwrap();
    config["backend"]["kind"] = "http".into();
    config["backend"]["base_url"] = "http://127.0.0.1:9".into();
    config["backend"]["timeout_s"] = 2.0.into();
    config["output_dir"] = "runs-http".into();
    std::fs::write(
        dir.path().join("http.json"),
        serde_json::to_string_pretty(&config).unwrap(),
    )
    .unwrap();

    let out = corpusgate(&["run", "--config", "http.json"], dir.path());
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr(&out));

    let raw = std::fs::read_to_string(dir.path().join("runs-http").join("report.json")).unwrap();
    let report: serde_json::Value = serde_json::from_str(&raw).unwrap();
    assert_eq!(report["status"], "aborted");
    assert!(report.get("aggregates").is_none());
    assert!(!report["error"].as_str().unwrap_or_default().is_empty());
}

#[test]
fn validate_one_prints_a_verdict() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("response.json"),
        r#"{"query_id": "q1", "text": "Alpha beta gamma delta. [doc:r1]"}"#,
    )
    .unwrap();
    std::fs::write(
        dir.path().join("retrieved.jsonl"),
        r#"{"id": "r1", "text": "Alpha beta gamma delta."}"#,
    )
    .unwrap();
    let out = corpusgate(
        &[
            "validate-one",
            "--response",
            "response.json",
            "--retrieved",
            "retrieved.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr(&out));
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["decision"], "accept");
    assert_eq!(verdict["grounding_score"], 1.0);
    assert_eq!(verdict["attribution_score"], 1.0);

    // The same response with a citation pointing nowhere must fail.
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"text": "Alpha beta gamma delta. [doc:ghost]"}"#,
    )
    .unwrap();
    let out = corpusgate(
        &[
            "validate-one",
            "--response",
            "bad.json",
            "--retrieved",
            "retrieved.jsonl",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
    let verdict: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(verdict["decision"], "reject_attribution");
}
