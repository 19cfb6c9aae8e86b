use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use eicl_runner::fixture::shipped_dir;

fn eicl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eicl"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn config() -> String {
    shipped_dir().join("config.json").display().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A copy of the shipped fixture that tests may edit.
fn fixture_copy(dir: &Path) -> PathBuf {
    for entry in std::fs::read_dir(shipped_dir()).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dir.join(entry.file_name())).unwrap();
    }
    dir.join("config.json")
}

#[test]
fn validate_ok() {
    let o = eicl(&["validate", "--config", &config()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).trim(), "OK");
}

#[test]
fn validate_names_missing_id() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_copy(dir.path());
    let store = dir.path().join("emotion_store.jsonl");
    let text = std::fs::read_to_string(&store).unwrap();
    let kept: Vec<&str> = text.lines().filter(|l| !l.contains("\"te-0042\"")).collect();
    std::fs::write(&store, kept.join("\n") + "\n").unwrap();

    let o = eicl(&["validate", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("te-0042"), "{}", stderr(&o));
}

#[test]
fn range_error_precedes_file_access() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(
        &cfg,
        r#"{"corpus": "does/not/exist.jsonl", "emotion_store": "missing.jsonl", "alpha": 1.5}"#,
    )
    .unwrap();
    let o = eicl(&["validate", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert!(err.contains("alpha 1.5"), "{err}");
    assert!(!err.contains("exist.jsonl") && !err.contains("missing.jsonl"), "{err}");
}

#[test]
fn flag_overrides_are_checked_too() {
    let o = eicl(&["validate", "--config", &config(), "--k2", "9"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("k2 9"), "{}", stderr(&o));
}

#[test]
fn run_with_oracle_prints_perfect_scores() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = eicl(&["run", "--config", &config(), "--mock", "oracle", "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let last: Vec<&str> = text.lines().rev().take(2).collect();
    assert_eq!(last, ["macro_f1=1.0000", "accuracy=1.0000"]);
    for name in ["report.json", "predictions.csv", "trace.jsonl"] {
        assert!(out.join(name).exists(), "{name}");
    }
    let leftovers: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter(|e| e.as_ref().unwrap().file_name().to_string_lossy().ends_with(".partial"))
        .collect();
    assert!(leftovers.is_empty());

    let csv = std::fs::read_to_string(out.join("predictions.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("id,gold,prediction,correct,top_score"));
    assert_eq!(csv.lines().count(), 121);

    let shown = eicl(&["report", s(&out.join("report.json"))]);
    assert_eq!(shown.status.code(), Some(0));
    let text = stdout(&shown);
    assert!(text.contains("provider: oracle"));
    assert!(text.trim_end().ends_with("accuracy=1.0000\nmacro_f1=1.0000"));
}

#[test]
fn sweep_writes_one_report_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = eicl(&["sweep", "--config", &config(), "--axis", "k3", "--values", "1,2,4", "-o", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for v in [1, 2, 4] {
        assert!(out.join(format!("report_k3_{v}.json")).exists());
    }
    let summary = std::fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 4);
    assert!(summary.starts_with("axis,value,accuracy,macro_f1"));
    assert!(stdout(&o).lines().last().unwrap().starts_with("macro_f1="));
}

#[test]
fn pilot_writes_bins() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pilot");
    let o = eicl(&[
        "pilot", "--config", &config(), "--bins", "4", "--queries-per-set", "10", "-o", s(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("pilot.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("pilot.json")).unwrap()).unwrap();
    assert_eq!(report["total_queries"], 80);
}

#[test]
fn pilot_with_oracle_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let o = eicl(&[
        "pilot", "--config", &config(), "--mock", "oracle", "--sets", "2", "-o", s(dir.path()),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).ends_with("accuracy=1.0000\nmacro_f1=1.0000\n"));
}

#[test]
fn ingest_summarizes_store() {
    let store = shipped_dir().join("emotion_store.jsonl");
    let o = eicl(&["ingest", s(&store)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("records=730"));
    assert!(text.contains("dimension=16"));
}

#[test]
fn synth_reproduces_shipped_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let o = eicl(&["synth", "--out", s(dir.path())]);
    assert_eq!(o.status.code(), Some(0));
    for name in ["corpus.jsonl", "emotion_store.jsonl", "script.json"] {
        assert_eq!(
            std::fs::read(dir.path().join(name)).unwrap(),
            std::fs::read(shipped_dir().join(name)).unwrap()
        );
    }
}

#[test]
fn unwritable_output_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let o = eicl(&["run", "--config", &config(), "-o", s(&blocker.join("out"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_flag_value_is_a_validation_failure() {
    let o = eicl(&["run", "--config", &config(), "--mode", "bogus"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn key_never_reaches_outputs() {
    const KEY: &str = "sk-test-0123456789abcdefSECRET";
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture_copy(dir.path());
    let mut value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&cfg).unwrap()).unwrap();
    value["provider"] = serde_json::json!({
        "kind": "http",
        "provider_id": "local",
        "endpoint_url": "http://127.0.0.1:9/v1/chat/completions",
        "auth_env_var": "EICL_TEST_SECRET_KEY",
        "timeout_ms": 2000,
        "max_retries": 0
    });
    std::fs::write(&cfg, serde_json::to_string_pretty(&value).unwrap()).unwrap();
    let out = dir.path().join("out");

    let o = Command::new(env!("CARGO_BIN_EXE_eicl"))
        .args(["run", "--config", s(&cfg), "-o", s(&out)])
        .env("EICL_TEST_SECRET_KEY", KEY)
        .env("EICL_LOG", "trace")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("transport_failures=120"));
    let mut scanned = vec![stdout(&o), stderr(&o)];
    for name in ["report.json", "predictions.csv", "trace.jsonl"] {
        scanned.push(std::fs::read_to_string(out.join(name)).unwrap());
    }
    for text in &scanned {
        assert!(!text.contains(KEY));
        assert!(!text.contains("0123456789abcdef"));
    }
    assert!(scanned[2].contains("EICL_TEST_SECRET_KEY"), "config keeps the variable name");

    let missing = Command::new(env!("CARGO_BIN_EXE_eicl"))
        .args(["run", "--config", s(&cfg), "-o", s(&out)])
        .env_remove("EICL_TEST_SECRET_KEY")
        .output()
        .unwrap();
    assert_ne!(missing.status.code(), Some(0));
    assert!(stderr(&missing).contains("EICL_TEST_SECRET_KEY"));
}

#[test]
fn unknown_template_is_a_validation_failure() {
    let o = eicl(&["validate", "--config", &config(), "--template", "nope"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("nope"), "{}", stderr(&o));
}
