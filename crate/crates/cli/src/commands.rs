use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use emotune::emotion::export::{from_csv, from_json, policy_hash, to_csv, to_svg};
use emotune::emotion::{psychological_priors, EmotionState};
use emotune::negotiation::transcript::{
    outcomes_to_csv, read_transcript, verify_transcript, write_transcript, OutcomeRow, TranscriptHeader,
};
use emotune::negotiation::{EpisodeRecord, Metrics, NegotiationEngine};
use emotune::optimizer::rundir::{read_report, write_run, BEST_MATRIX_FILE, HISTORY_FILE};
use emotune::optimizer::{baseline_random, evaluate_policy, optimize, OptimizerReport};
use emotune::scenarios::{cases_to_csv, generate_cases, save_cases, summarize, CreditCase};
use emotune::TransitionMatrix;
use serde::Serialize;

use crate::config::{RunArgs, RunConfig};
use crate::error::CliError;

pub const RUN_LOG: &str = "run.log";

fn write(path: &Path, body: impl AsRef<[u8]>) -> Result<(), CliError> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io("create", parent, e))?;
    }
    fs::write(path, body).map_err(|e| CliError::io("write", path, e))
}

fn unix_time() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

pub fn generate(n: usize, seed: u64, out: &Path, csv: Option<&Path>) -> Result<(), CliError> {
    let cases = generate_cases(n, seed);
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| CliError::io("create", parent, e))?;
    }
    save_cases(&cases, out)?;
    if let Some(path) = csv {
        write(path, cases_to_csv(&cases)?)?;
    }
    let summary = summarize(&cases)?;
    println!("wrote {} cases to {}", cases.len(), out.display());
    println!("{:<22} {:>12} {:>12} {:>12} {:>12}", "field", "mean", "std", "min", "max");
    for (field, s) in &summary.numeric {
        println!("{field:<22} {:>12.2} {:>12.2} {:>12.2} {:>12.2}", s.mean, s.std, s.min, s.max);
    }
    for (field, table) in &summary.categories {
        let counts: Vec<String> = table.iter().map(|(k, v)| format!("{k}={v}")).collect();
        println!("{field}: {}", counts.join(", "));
    }
    Ok(())
}

fn batch<'a>(cfg: &RunConfig, scenarios: &'a [CreditCase]) -> &'a [CreditCase] {
    &scenarios[..cfg.batch.min(scenarios.len())]
}

pub fn optimize_cmd(args: &RunArgs, out: &Path, dry_run: bool) -> Result<(), CliError> {
    let cfg = args.resolve()?;
    if dry_run {
        println!("{}", serde_json::to_string_pretty(&cfg).expect("config serializes"));
        return Ok(());
    }
    let started = unix_time();
    let scenarios = cfg.load_scenarios()?;
    let profiles = cfg.debtor_profiles();
    let engine = cfg.engine()?;
    let (report, history) = optimize(&cfg.optimizer_config(), &engine, batch(&cfg, &scenarios), &profiles)?;
    write_run(out, &cfg, &report, &history).map_err(|e| CliError::io("write run directory", out, e))?;
    let log = format!(
        "started_unix={started}\nfinished_unix={}\nevaluations={}\nstop_reason={:?}\n",
        unix_time(),
        history.len(),
        report.stop_reason
    );
    write(&out.join(RUN_LOG), log)?;
    print_report(&report);
    println!("run directory: {}", out.display());
    Ok(())
}

/// Where the evaluated policy comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySource {
    Priors,
    /// Best matrix of a uniform-selection search with the optimizer's budget.
    Random,
    /// Matrix file (CSV or JSON) or run directory.
    Path(PathBuf),
}

impl std::str::FromStr for PolicySource {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "priors" => PolicySource::Priors,
            "random" => PolicySource::Random,
            path => PolicySource::Path(PathBuf::from(path)),
        })
    }
}

pub fn load_matrix(path: &Path) -> Result<TransitionMatrix, CliError> {
    let file = if path.is_dir() { path.join(BEST_MATRIX_FILE) } else { path.to_path_buf() };
    let text = fs::read_to_string(&file).map_err(|e| CliError::io("read matrix", &file, e))?;
    let is_json = file.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{');
    Ok(if is_json { from_json(&text)? } else { from_csv(&text)? })
}

#[derive(Debug, Serialize)]
struct Spread {
    mean: f64,
    std: f64,
}

fn spread(values: &[f64]) -> Option<Spread> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = if values.len() > 1 { values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
    Some(Spread { mean, std: var.sqrt() })
}

#[derive(Debug, Serialize)]
struct EvaluationSummary {
    policy: String,
    policy_hash: String,
    scenarios: usize,
    profiles: usize,
    runs: Vec<RunMetrics>,
    success_rate: Option<Spread>,
    collection_efficiency: Option<Spread>,
    negotiation_speed: Option<Spread>,
    mean_reward: Option<Spread>,
}

#[derive(Debug, Serialize)]
struct RunMetrics {
    repeat: u64,
    metrics: Metrics,
    mean_reward: f64,
    infrastructure_failures: usize,
}

pub fn evaluate_cmd(
    args: &RunArgs,
    repeats: Option<usize>,
    source: &PolicySource,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let mut cfg = args.resolve()?;
    if let Some(r) = repeats {
        cfg.repeats = r;
        cfg.validate()?;
    }
    let scenarios = cfg.load_scenarios()?;
    let profiles = cfg.debtor_profiles();
    let engine = cfg.engine()?;
    let policy = match source {
        PolicySource::Priors => psychological_priors(),
        PolicySource::Random => {
            baseline_random(&cfg.optimizer_config(), &engine, batch(&cfg, &scenarios), &profiles)?.0.best_matrix
        }
        PolicySource::Path(p) => load_matrix(p)?,
    };
    let label = match source {
        PolicySource::Priors => "priors".to_string(),
        PolicySource::Random => "random".to_string(),
        PolicySource::Path(p) => p.display().to_string(),
    };

    let mut runs = Vec::new();
    let mut first_records = None;
    for repeat in 0..cfg.repeats as u64 {
        let (summary, evaluated) = evaluate_policy(&policy, &engine, &scenarios, &profiles, repeat)?;
        if repeat == 0 {
            first_records = Some(evaluated.records);
        }
        runs.push(RunMetrics {
            repeat,
            metrics: summary.metrics,
            mean_reward: summary.mean_reward,
            infrastructure_failures: summary.infrastructure_failures,
        });
    }
    let collect = |f: &dyn Fn(&RunMetrics) -> Option<f64>| spread(&runs.iter().filter_map(f).collect::<Vec<_>>());
    let summary = EvaluationSummary {
        policy: label,
        policy_hash: policy_hash(&policy),
        scenarios: scenarios.len(),
        profiles: profiles.len(),
        success_rate: collect(&|r| Some(r.metrics.success_rate)),
        collection_efficiency: collect(&|r| r.metrics.collection_efficiency),
        negotiation_speed: collect(&|r| Some(r.metrics.negotiation_speed)),
        mean_reward: collect(&|r| Some(r.mean_reward)),
        runs,
    };
    print!("{}", metrics_table(&summary));

    if let Some(dir) = out {
        let records = first_records.unwrap_or_default();
        write(&dir.join("metrics.json"), serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
        write(&dir.join("policy.csv"), to_csv(&policy))?;
        write_outcomes(dir, &engine, &scenarios, &policy, &records)?;
        println!("outputs: {}", dir.display());
    }
    Ok(())
}

fn metrics_table(s: &EvaluationSummary) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "policy {} ({})", s.policy, &s.policy_hash[..12]);
    let _ = writeln!(out, "{} scenarios x {} profiles, {} seeded runs", s.scenarios, s.profiles, s.runs.len());
    let _ = writeln!(out, "{:<26} {:>10} {:>10}", "metric", "mean", "std");
    for (name, value) in [
        ("success_rate_pct", &s.success_rate),
        ("collection_efficiency", &s.collection_efficiency),
        ("negotiation_speed", &s.negotiation_speed),
        ("mean_reward", &s.mean_reward),
    ] {
        match value {
            Some(v) => _ = writeln!(out, "{name:<26} {:>10.4} {:>10.4}", v.mean, v.std),
            None => _ = writeln!(out, "{name:<26} {:>10} {:>10}", "n/a", "n/a"),
        }
    }
    out
}

fn write_outcomes(
    dir: &Path,
    engine: &NegotiationEngine,
    scenarios: &[CreditCase],
    policy: &TransitionMatrix,
    records: &[EpisodeRecord],
) -> Result<(), CliError> {
    let hash = policy_hash(policy);
    let mut rows = Vec::new();
    for r in records {
        let Ok(episode) = &r.result else { continue };
        let scenario = scenarios.iter().find(|s| s.case_id == r.scenario_id).expect("record comes from this batch");
        rows.push(OutcomeRow {
            scenario_id: r.scenario_id.clone(),
            profile: r.profile,
            terminal_state: episode.outcome.terminal,
            n_rounds: episode.outcome.n_rounds,
            d_target: episode.outcome.d_target,
            d_final: episode.outcome.d_final,
            reward: episode.reward,
        });
        let header = TranscriptHeader {
            scenario_id: r.scenario_id.clone(),
            profile: r.profile,
            policy_hash: hash.clone(),
            seed: r.seed,
            d_target: scenario.target_days,
            config: engine.config,
        };
        let name = format!("transcripts/{}_{}.jsonl", r.scenario_id, r.profile);
        write(&dir.join(name), write_transcript(&header, episode))?;
    }
    let csv = outcomes_to_csv(&rows).map_err(|e| CliError::Usage(format!("outcome csv: {e}")))?;
    write(&dir.join("outcomes.csv"), csv)
}

pub fn replay(path: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io("read transcript", path, e))?;
    let stored = read_transcript(&text)?;
    let h = &stored.header;
    println!("scenario {} | debtor {} | target {} days | seed {}", h.scenario_id, h.profile, h.d_target, h.seed);
    for t in &stored.turns {
        let offer = |o: Option<u32>| o.map_or("-".to_string(), |d| d.to_string());
        println!(
            "--- round {} [{}] creditor offer {} | debtor offer {}",
            t.round,
            t.creditor_emotion,
            offer(t.creditor_offer),
            offer(t.debtor_offer)
        );
        println!("creditor: {}", t.creditor_message.trim());
        println!("debtor:   {}", t.debtor_message.trim());
        println!("examiner: {:?}", t.classification);
    }
    let (outcome, reward) = verify_transcript(&stored)?;
    let settled = outcome.d_final.map_or(String::new(), |d| format!(" at {d} days"));
    println!(
        "outcome: {}{settled} after {} rounds; reward {reward} (matches stored record)",
        outcome.terminal, outcome.n_rounds
    );
    Ok(())
}

fn print_matrix(m: &TransitionMatrix) {
    print!("{:>12}", "");
    for e in EmotionState::ALL {
        print!("{:>8}", e.abbreviation());
    }
    println!();
    for (e, row) in EmotionState::ALL.iter().zip(m.rows()) {
        print!("{:>12}", e.label());
        for p in row {
            print!("{p:>8.3}");
        }
        println!();
    }
}

fn print_report(report: &OptimizerReport) {
    println!("{:>4} {:>14} {:>14} {:>9} {:>8}", "iter", "best_reward", "selected", "entropy", "improved");
    for it in &report.iterations {
        println!(
            "{:>4} {:>14.4} {:>14.4} {:>9.4} {:>8}",
            it.iteration, it.best_reward, it.selected_reward, it.entropy, it.improved
        );
    }
    println!("stop reason: {:?}", report.stop_reason);
    println!("best reward: {:.4}", report.best_reward);
    println!("best matrix (entropy {:.4} nats):", report.best_matrix.entropy());
    print_matrix(&report.best_matrix);
}

pub fn report(dir: &Path, svg: Option<&Path>) -> Result<(), CliError> {
    let report = read_report(dir).map_err(|e| CliError::io("read run report in", dir, e))?;
    print_report(&report);
    if let Ok(text) = fs::read_to_string(dir.join(HISTORY_FILE)) {
        println!("evaluated candidates: {}", text.lines().filter(|l| !l.trim().is_empty()).count());
    }
    if let Some(path) = svg {
        write(path, to_svg(&report.best_matrix, "best transition matrix"))?;
        println!("heatmap: {}", path.display());
    }
    Ok(())
}
