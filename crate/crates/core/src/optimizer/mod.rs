//! The outer optimization loop, candidate selection and the ablation baselines.

mod history;
mod objective;
pub mod rundir;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use history::{History, HistoryEntry};
pub use objective::{
    evaluate_candidate, mean, CandidateEvaluation, CandidateKey, DistanceObjective, Evaluation, EvaluationError,
    NegotiationObjective, Objective,
};

use crate::emotion::{dirichlet_perturb, psychological_priors, MatrixError};
use crate::negotiation::{DebtorProfile, Metrics, NegotiationEngine};
use crate::scenarios::CreditCase;
use crate::seed::stream;
use crate::surrogate::{GaussianProcess, KernelParams};
use crate::TransitionMatrix;

const CANDIDATE_STREAM: u64 = 0x6361_6e64;
const SELECTION_STREAM: u64 = 0x7365_6c65;
const SEARCH_EVAL_STREAM: u64 = 1;
const RANDOM_EVAL_STREAM: u64 = 2;
const HOLDOUT_EVAL_STREAM: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub iterations: usize,
    pub candidates: usize,
    pub patience: usize,
    pub improvement_threshold: f64,
    pub xi: f64,
    pub concentration: f64,
    pub smoothing: f64,
    pub master_seed: u64,
    pub kernel: KernelParams<f64>,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            iterations: 10,
            candidates: 20,
            patience: 5,
            improvement_threshold: 0.1,
            xi: 0.01,
            concentration: crate::emotion::DEFAULT_CONCENTRATION,
            smoothing: crate::emotion::DEFAULT_SMOOTHING,
            master_seed: 0,
            kernel: KernelParams::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), OptimizerError> {
        let bad = |msg: String| Err(OptimizerError::Config(msg));
        if self.iterations == 0 || self.candidates == 0 || self.patience == 0 {
            return bad("iterations, candidates and patience must be at least 1".into());
        }
        if !(self.improvement_threshold >= 0.0 && self.improvement_threshold.is_finite()) {
            return bad(format!("improvement threshold must be >= 0, got {}", self.improvement_threshold));
        }
        if !(self.xi >= 0.0 && self.xi.is_finite()) {
            return bad(format!("xi must be >= 0, got {}", self.xi));
        }
        if !(self.concentration > 0.0 && self.smoothing > 0.0) {
            return bad("concentration and smoothing must be positive".into());
        }
        self.kernel.validate().map_err(|e| OptimizerError::Config(e.to_string()))
    }
}

#[derive(Debug, thiserror::Error)]
pub enum OptimizerError {
    #[error("invalid optimizer config: {0}")]
    Config(String),
    #[error("candidate {index} of iteration {iteration}: {source}")]
    Evaluation {
        iteration: usize,
        index: usize,
        #[source]
        source: EvaluationError,
    },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    BudgetExhausted,
}

/// How the next perturbation centre is picked from the evaluated candidates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionRule {
    ExpectedImprovement,
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationSummary {
    pub iteration: usize,
    pub selected: usize,
    pub selected_reward: f64,
    pub iteration_best: f64,
    pub best_reward: f64,
    pub entropy: f64,
    pub improved: bool,
    pub used_surrogate: bool,
    pub best_matrix: TransitionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerReport {
    pub selection: SelectionRule,
    /// Incumbent recorded at the last improving iteration.
    pub best_matrix: TransitionMatrix,
    /// Maximum mean reward over the whole history.
    pub best_reward: f64,
    /// Highest-reward matrix in the history.
    pub best_observed: TransitionMatrix,
    /// Best reward so far after each completed iteration.
    pub reward_trace: Vec<f64>,
    /// Entropy of the selected matrix after each completed iteration.
    pub entropy_trace: Vec<f64>,
    pub iterations: Vec<IterationSummary>,
    pub stop_reason: StopReason,
}

pub fn generate_candidates<R: Rng + ?Sized>(
    current: &TransitionMatrix,
    n: usize,
    config: &OptimizerConfig,
    rng: &mut R,
) -> Result<Vec<TransitionMatrix>, MatrixError> {
    (0..n).map(|_| dirichlet_perturb(current, config.concentration, config.smoothing, rng)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub index: usize,
    /// EI per candidate when the surrogate was used.
    pub scores: Option<Vec<f64>>,
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Picks the candidate with maximal EI under a GP fitted on `history`, or the
/// maximal evaluated reward while `history` has fewer than two points.
pub fn select_next(
    history: &History,
    candidates: &[TransitionMatrix],
    rewards: &[f64],
    kernel: KernelParams<f64>,
    xi: f64,
) -> Selection {
    assert!(!candidates.is_empty(), "select_next needs at least one candidate");
    assert_eq!(candidates.len(), rewards.len(), "one reward per candidate");
    if history.len() < 2 {
        return Selection { index: argmax(rewards), scores: None };
    }
    let inputs: Vec<&[f64]> = history.entries().iter().map(|e| e.strategy.as_slice()).collect();
    let ys: Vec<f64> = history.entries().iter().map(|e| e.mean_reward).collect();
    let gp = match GaussianProcess::fit_raw(&inputs, &ys, kernel) {
        Ok(gp) => gp,
        Err(e) => {
            log::warn!("surrogate fit failed ({e}); selecting by reward");
            return Selection { index: argmax(rewards), scores: None };
        }
    };
    let best = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scores: Vec<f64> =
        candidates.iter().map(|c| gp.expected_improvement(c.flatten().as_slice(), best, xi)).collect();
    if scores.iter().all(|&s| s <= 0.0) {
        log::debug!("expected improvement vanishes for every candidate; selecting by reward");
        return Selection { index: argmax(rewards), scores: Some(scores) };
    }
    Selection { index: argmax(&scores), scores: Some(scores) }
}

/// Search loop shared by the optimizer and the random-exploration baseline.
pub fn search(
    config: &OptimizerConfig,
    objective: &dyn Objective,
    rule: SelectionRule,
) -> Result<(OptimizerReport, History), OptimizerError> {
    config.validate()?;
    let mut history = History::new();
    let mut current: TransitionMatrix = psychological_priors();
    let mut best_matrix = current;
    let mut best_reward = f64::NEG_INFINITY;
    let mut best_observed = current;
    let mut counter = 0;
    let mut reward_trace = Vec::new();
    let mut entropy_trace = Vec::new();
    let mut iterations = Vec::new();
    let mut stop_reason = StopReason::BudgetExhausted;
    let mut selection_rng = stream(config.master_seed, &[SELECTION_STREAM]);

    for k in 0..config.iterations {
        let mut rng = stream(config.master_seed, &[CANDIDATE_STREAM, k as u64]);
        let candidates = generate_candidates(&current, config.candidates, config, &mut rng)?;
        let evaluations = candidates
            .par_iter()
            .enumerate()
            .map(|(j, c)| {
                objective
                    .evaluate(c, CandidateKey { iteration: k, index: j })
                    .map_err(|source| OptimizerError::Evaluation { iteration: k, index: j, source })
            })
            .collect::<Result<Vec<_>, _>>()?;

        let rewards: Vec<f64> = evaluations.iter().map(|e| e.mean_reward).collect();
        for (j, (c, e)) in candidates.iter().zip(evaluations).enumerate() {
            history.push(k, j, c, e.mean_reward, e.episode_rewards);
        }

        let (selected, used_surrogate) = match rule {
            SelectionRule::ExpectedImprovement => {
                let s = select_next(&history, &candidates, &rewards, config.kernel, config.xi);
                (s.index, s.scores.is_some())
            }
            SelectionRule::Uniform => (selection_rng.random_range(0..candidates.len()), false),
        };
        current = candidates[selected];

        let iteration_best = rewards[argmax(&rewards)];
        let improved = iteration_best > best_reward + config.improvement_threshold;
        if improved {
            best_matrix = current;
            counter = 0;
        } else {
            counter += 1;
        }
        if iteration_best > best_reward {
            best_reward = iteration_best;
            best_observed = candidates[argmax(&rewards)];
        }
        reward_trace.push(best_reward);
        entropy_trace.push(current.entropy());
        iterations.push(IterationSummary {
            iteration: k,
            selected,
            selected_reward: rewards[selected],
            iteration_best,
            best_reward,
            entropy: current.entropy(),
            improved,
            used_surrogate,
            best_matrix,
        });
        log::info!(
            "iteration {k}: best {best_reward:.4}, selected #{selected} ({:.4}), stall {counter}",
            rewards[selected]
        );
        if counter >= config.patience {
            stop_reason = StopReason::Converged;
            break;
        }
    }

    let report = OptimizerReport {
        selection: rule,
        best_matrix,
        best_reward,
        best_observed,
        reward_trace,
        entropy_trace,
        iterations,
        stop_reason,
    };
    Ok((report, history))
}

/// Runs the full optimizer over a negotiation batch starting from the priors.
pub fn optimize(
    config: &OptimizerConfig,
    engine: &NegotiationEngine,
    scenarios: &[CreditCase],
    profiles: &[DebtorProfile],
) -> Result<(OptimizerReport, History), OptimizerError> {
    let objective = NegotiationObjective { engine, scenarios, profiles, stream_tag: SEARCH_EVAL_STREAM };
    search(config, &objective, SelectionRule::ExpectedImprovement)
}

/// Policy quality on a batch: metrics plus mean reward.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolicyEvaluation {
    pub metrics: Metrics,
    pub mean_reward: f64,
    pub infrastructure_failures: usize,
}

/// Evaluates a fixed policy on a stream separate from any search.
pub fn evaluate_policy(
    policy: &TransitionMatrix,
    engine: &NegotiationEngine,
    scenarios: &[CreditCase],
    profiles: &[DebtorProfile],
    repeat: u64,
) -> Result<(PolicyEvaluation, CandidateEvaluation), EvaluationError> {
    let evaluated = evaluate_candidate(policy, scenarios, profiles, engine, &[HOLDOUT_EVAL_STREAM, repeat])?;
    let metrics = evaluated
        .metrics()
        .ok_or(EvaluationError::NoUsableEpisodes { failures: evaluated.evaluation.infrastructure_failures })?;
    let summary = PolicyEvaluation {
        metrics,
        mean_reward: evaluated.evaluation.mean_reward,
        infrastructure_failures: evaluated.evaluation.infrastructure_failures,
    };
    Ok((summary, evaluated))
}

/// The priors with no learning.
pub fn baseline_static(
    engine: &NegotiationEngine,
    scenarios: &[CreditCase],
    profiles: &[DebtorProfile],
) -> Result<PolicyEvaluation, EvaluationError> {
    evaluate_policy(&psychological_priors(), engine, scenarios, profiles, 0).map(|(s, _)| s)
}

/// Same budget and perturbations as [`optimize`], but the next centre is
/// drawn uniformly among the candidates.
pub fn baseline_random(
    config: &OptimizerConfig,
    engine: &NegotiationEngine,
    scenarios: &[CreditCase],
    profiles: &[DebtorProfile],
) -> Result<(OptimizerReport, PolicyEvaluation), OptimizerError> {
    let objective = NegotiationObjective { engine, scenarios, profiles, stream_tag: RANDOM_EVAL_STREAM };
    let (report, _) = search(config, &objective, SelectionRule::Uniform)?;
    let (summary, _) = evaluate_policy(&report.best_matrix, engine, scenarios, profiles, 0)
        .map_err(|source| OptimizerError::Evaluation { iteration: config.iterations, index: 0, source })?;
    Ok((report, summary))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emotion::StochasticMatrix;

    fn constant(value: f64) -> impl Objective {
        move |_: &TransitionMatrix, _: CandidateKey| Ok(Evaluation::single(value))
    }

    #[test]
    fn constant_reward_converges_after_patience() {
        let config = OptimizerConfig { master_seed: 3, ..Default::default() };
        let (report, history) = search(&config, &constant(-365.0), SelectionRule::ExpectedImprovement).unwrap();
        assert_eq!(report.stop_reason, StopReason::Converged);
        assert_eq!(report.iterations.len(), 1 + config.patience);
        assert_eq!(history.len(), report.iterations.len() * config.candidates);
        assert_eq!(report.best_reward, -365.0);
    }

    #[test]
    fn budget_exhausted_when_always_improving() {
        let config = OptimizerConfig { iterations: 4, candidates: 3, ..Default::default() };
        let objective = |_: &TransitionMatrix, key: CandidateKey| Ok(Evaluation::single(key.iteration as f64));
        let (report, _) = search(&config, &objective, SelectionRule::Uniform).unwrap();
        assert_eq!(report.stop_reason, StopReason::BudgetExhausted);
        assert_eq!(report.reward_trace, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn else_branch_picks_max_reward() {
        let cands = vec![StochasticMatrix::uniform(), psychological_priors()];
        let s = select_next(&History::new(), &cands, &[-3.0, -1.0], KernelParams::default(), 0.01);
        assert_eq!(s, Selection { index: 1, scores: None });
    }

    #[test]
    fn single_candidate_always_selected() {
        let mut h = History::new();
        h.push(0, 0, &psychological_priors(), -1.0, vec![-1.0]);
        h.push(0, 1, &StochasticMatrix::uniform(), -2.0, vec![-2.0]);
        let s = select_next(&h, &[StochasticMatrix::uniform()], &[-2.0], KernelParams::default(), 0.01);
        assert_eq!(s.index, 0);
    }

    #[test]
    fn evaluation_failure_propagates() {
        let config = OptimizerConfig { iterations: 2, candidates: 2, ..Default::default() };
        let failing = |_: &TransitionMatrix, _: CandidateKey| Err(EvaluationError::NoUsableEpisodes { failures: 7 });
        assert!(matches!(
            search(&config, &failing, SelectionRule::ExpectedImprovement),
            Err(OptimizerError::Evaluation { iteration: 0, .. })
        ));
    }

    #[test]
    fn invalid_config_rejected() {
        let config = OptimizerConfig { candidates: 0, ..Default::default() };
        assert!(matches!(config.validate(), Err(OptimizerError::Config(_))));
    }
}
