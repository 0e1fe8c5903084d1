use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn emotune(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_emotune")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn generate_writes_identical_files_for_the_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    let out = emotune(&["generate-scenarios", "-n", "100", "--seed", "5", "--out", s(&a)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stdout(&out).contains("wrote 100 cases"));
    assert!(stdout(&out).contains("outstanding_balance"));
    emotune(&["generate-scenarios", "-n", "100", "--seed", "5", "--out", s(&b)]);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let cases: Value = serde_json::from_slice(&fs::read(&a).unwrap()).unwrap();
    assert_eq!(cases.as_array().unwrap().len(), 100);
}

#[test]
fn zero_cases_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = emotune(&["generate-scenarios", "-n", "0", "--seed", "5", "--out", s(&dir.path().join("x.json"))]);
    assert_eq!(code(&out), 1);
    assert!(!dir.path().join("x.json").exists());
}

#[test]
fn dry_run_prints_the_resolved_config_with_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    fs::write(&cfg, r#"{"seed": 9, "optimizer": {"iterations": 4, "candidates": 6}, "batch": 3}"#).unwrap();
    let out = emotune(&["optimize", "--config", s(&cfg), "--candidates", "8", "--kernel", "matern52", "--dry-run"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let resolved: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(resolved["seed"], 9);
    assert_eq!(resolved["batch"], 3);
    assert_eq!(resolved["optimizer"]["iterations"], 4);
    assert_eq!(resolved["optimizer"]["candidates"], 8);
    assert_eq!(resolved["optimizer"]["patience"], 5);
    assert_eq!(resolved["optimizer"]["kernel"]["smoothness"], "matern52");
    assert_eq!(resolved["profiles"].as_array().unwrap().len(), 7);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    // scripted runs need a seed
    assert_eq!(code(&emotune(&["optimize", "--out", s(&run)])), 1);
    assert_eq!(code(&emotune(&["optimize", "--seed", "1", "--profiles", "grumpy", "--out", s(&run)])), 1);
    assert_eq!(code(&emotune(&["optimize", "--seed", "1", "--reward-form", "sum", "--out", s(&run)])), 1);
    assert_eq!(code(&emotune(&["optimize", "--seed", "1", "--backend", "remote", "--out", s(&run)])), 1);
    assert_eq!(code(&emotune(&["frobnicate"])), 1);
    assert_eq!(code(&emotune(&["--help"])), 0);
}

#[test]
fn remote_backend_without_credential_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let endpoint = dir.path().join("endpoint.json");
    fs::write(
        &endpoint,
        r#"{"base_url": "http://127.0.0.1:9/v1", "model": "m", "credential_env": "EMOTUNE_CLI_TEST_UNSET_KEY"}"#,
    )
    .unwrap();
    let out = emotune(&["evaluate", "--backend", "remote", "--endpoint", s(&endpoint), "--scenario-count", "1"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("EMOTUNE_CLI_TEST_UNSET_KEY"));
}

#[test]
fn optimize_is_reproducible_and_writes_the_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &Path| {
        let o = emotune(&[
            "optimize",
            "--seed",
            "11",
            "--scenario-count",
            "4",
            "--batch",
            "4",
            "--iterations",
            "3",
            "--candidates",
            "5",
            "--out",
            s(out),
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        o
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let out = args(&a);
    args(&b);
    assert!(stdout(&out).contains("stop reason"));
    for file in ["config.json", "history.jsonl", "report.json", "traces.csv", "best_matrix.csv", "heatmap.svg"] {
        let (x, y) = (fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap());
        assert_eq!(x, y, "{file} differs between identical runs");
    }
    assert!(a.join("run.log").exists());
    let report: Value = serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    assert!(["converged", "budget_exhausted"].contains(&report["stop_reason"].as_str().unwrap()));
    assert!(fs::read_to_string(a.join("heatmap.svg")).unwrap().starts_with("<svg"));

    let svg = dir.path().join("copy.svg");
    let rep = emotune(&["report", s(&a), "--svg", s(&svg)]);
    assert_eq!(code(&rep), 0, "{}", stderr(&rep));
    assert!(stdout(&rep).contains("evaluated candidates: 15"));
    assert_eq!(fs::read(&svg).unwrap(), fs::read(a.join("heatmap.svg")).unwrap());
}

/// The four metric rows of the evaluate table.
fn metric_rows(out: &Output) -> Vec<String> {
    assert_eq!(code(out), 0, "{}", stderr(out));
    stdout(out).lines().skip(3).take(4).map(str::to_string).collect()
}

#[test]
fn priors_file_evaluates_like_the_priors_source() {
    let dir = tempfile::tempdir().unwrap();
    let common = ["evaluate", "--seed", "12", "--scenario-count", "5", "--repeats", "2"];
    let priors_out = dir.path().join("priors");
    let mut a = common.to_vec();
    a.extend(["--policy", "priors", "--out", s(&priors_out)]);
    let from_source = emotune(&a);
    let mut b = common.to_vec();
    let file = priors_out.join("policy.csv");
    b.extend(["--policy", s(&file)]);
    let from_file = emotune(&b);
    assert_eq!(metric_rows(&from_source), metric_rows(&from_file));

    let summary: Value = serde_json::from_slice(&fs::read(priors_out.join("metrics.json")).unwrap()).unwrap();
    assert_eq!(summary["runs"].as_array().unwrap().len(), 2);
    assert!(summary["success_rate"]["std"].as_f64().unwrap() >= 0.0);
    let csv = fs::read_to_string(priors_out.join("outcomes.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 5 * 7);
    assert_eq!(fs::read_dir(priors_out.join("transcripts")).unwrap().count(), 35);
}

#[test]
fn malformed_matrix_is_a_validation_error_naming_the_row() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    let rows: Vec<&str> =
        (0..7).map(|i| if i == 3 { "0.5,0.5,0.5,0,0,0,0" } else { "0.1,0.1,0.1,0.1,0.2,0.2,0.2" }).collect();
    fs::write(&bad, rows.join("\n")).unwrap();
    let out = emotune(&["evaluate", "--seed", "1", "--scenario-count", "2", "--policy", s(&bad)]);
    assert_eq!(code(&out), 2, "{}", stderr(&out));
    assert!(stderr(&out).contains("row 3"), "{}", stderr(&out));
}

#[test]
fn replay_checks_integrity() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("eval");
    let out = emotune(&["evaluate", "--seed", "13", "--scenario-count", "3", "--repeats", "1", "--out", s(&out_dir)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let csv = fs::read_to_string(out_dir.join("outcomes.csv")).unwrap();
    let accepted = csv.lines().skip(1).find(|l| l.contains(",accepted,")).expect("some episode settles");
    let fields: Vec<&str> = accepted.split(',').collect();
    let path = out_dir.join(format!("transcripts/{}_{}.jsonl", fields[0], fields[1]));
    let shown = emotune(&["replay", s(&path)]);
    assert_eq!(code(&shown), 0, "{}", stderr(&shown));
    let last = stdout(&shown).lines().last().unwrap().to_string();
    assert!(last.starts_with("outcome: accepted"), "{last}");
    assert!(last.contains(&format!("reward {}", fields[6])), "{last} vs {accepted}");

    let text = fs::read_to_string(&path).unwrap();
    let outcome_line = text.lines().last().unwrap();
    let mut record: Value = serde_json::from_str(outcome_line).unwrap();
    record["reward"] = Value::from(record["reward"].as_f64().unwrap() - 1.0);
    let tampered = text.replace(outcome_line, &record.to_string());
    let bad = dir.path().join("tampered.jsonl");
    fs::write(&bad, tampered).unwrap();
    let out = emotune(&["replay", s(&bad)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("integrity"), "{}", stderr(&out));

    let empty = dir.path().join("empty.jsonl");
    fs::write(&empty, "").unwrap();
    assert_eq!(code(&emotune(&["replay", s(&empty)])), 1);
}

#[test]
fn optimized_policy_is_at_least_as_successful_as_the_priors_on_the_calibration_suite() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let o = emotune(&["optimize", "--seed", "3", "--batch", "100", "--out", s(&run)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let sr = |policy: &str| {
        let out_dir = dir.path().join(format!("eval-{}", policy.len()));
        let out = emotune(&["evaluate", "--seed", "3", "--repeats", "1", "--policy", policy, "--out", s(&out_dir)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let summary: Value = serde_json::from_slice(&fs::read(out_dir.join("metrics.json")).unwrap()).unwrap();
        summary["success_rate"]["mean"].as_f64().unwrap()
    };
    let (optimized, priors) = (sr(s(&run)), sr("priors"));
    assert!(optimized >= priors, "optimized SR {optimized} < priors SR {priors}");
}
