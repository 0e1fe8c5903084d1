use serde::{Deserialize, Serialize};

use crate::negotiation::{compute_metrics, AgentError, DebtorProfile, EpisodeRecord, Metrics, NegotiationEngine};
use crate::scenarios::CreditCase;
use crate::TransitionMatrix;

/// Identifies one candidate inside a run; also keys its RNG streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CandidateKey {
    pub iteration: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub mean_reward: f64,
    pub episode_rewards: Vec<f64>,
    pub infrastructure_failures: usize,
}

impl Evaluation {
    /// Evaluation of a deterministic black box: one "episode" with the given value.
    pub fn single(reward: f64) -> Self {
        Self { mean_reward: reward, episode_rewards: vec![reward], infrastructure_failures: 0 }
    }

    pub fn from_rewards(episode_rewards: Vec<f64>, infrastructure_failures: usize) -> Result<Self, EvaluationError> {
        if episode_rewards.is_empty() {
            return Err(EvaluationError::NoUsableEpisodes { failures: infrastructure_failures });
        }
        Ok(Self { mean_reward: mean(&episode_rewards), episode_rewards, infrastructure_failures })
    }
}

/// Arithmetic mean accumulated in order.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvaluationError {
    #[error("candidate evaluation produced no usable episodes ({failures} infrastructure failures)")]
    NoUsableEpisodes { failures: usize },
    #[error("evaluation batch is empty")]
    EmptyBatch,
    #[error("{0}")]
    Other(String),
}

/// A black-box reward over transition matrices.
pub trait Objective: Sync {
    fn evaluate(&self, policy: &TransitionMatrix, key: CandidateKey) -> Result<Evaluation, EvaluationError>;
}

impl<F> Objective for F
where
    F: Fn(&TransitionMatrix, CandidateKey) -> Result<Evaluation, EvaluationError> + Sync,
{
    fn evaluate(&self, policy: &TransitionMatrix, key: CandidateKey) -> Result<Evaluation, EvaluationError> {
        self(policy, key)
    }
}

/// `g(p) = -||p - p*||^2` for a fixed target matrix.
#[derive(Debug, Clone)]
pub struct DistanceObjective {
    pub target: TransitionMatrix,
}

impl DistanceObjective {
    pub fn value(&self, policy: &TransitionMatrix) -> f64 {
        -policy
            .rows()
            .iter()
            .flatten()
            .zip(self.target.rows().iter().flatten())
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
    }
}

impl Objective for DistanceObjective {
    fn evaluate(&self, policy: &TransitionMatrix, _key: CandidateKey) -> Result<Evaluation, EvaluationError> {
        Ok(Evaluation::single(self.value(policy)))
    }
}

/// Runs one episode per `(scenario, profile)` pair and averages the rewards.
#[derive(Debug, Clone)]
pub struct NegotiationObjective<'a> {
    pub engine: &'a NegotiationEngine,
    pub scenarios: &'a [CreditCase],
    pub profiles: &'a [DebtorProfile],
    /// Separates the RNG streams of different runs sharing a master seed.
    pub stream_tag: u64,
}

impl Objective for NegotiationObjective<'_> {
    fn evaluate(&self, policy: &TransitionMatrix, key: CandidateKey) -> Result<Evaluation, EvaluationError> {
        let stream = [self.stream_tag, key.iteration as u64, key.index as u64];
        evaluate_candidate(policy, self.scenarios, self.profiles, self.engine, &stream).map(|c| c.evaluation)
    }
}

/// Episodes and aggregate reward of one policy on one batch.
#[derive(Debug, Clone)]
pub struct CandidateEvaluation {
    pub evaluation: Evaluation,
    pub records: Vec<EpisodeRecord>,
}

impl CandidateEvaluation {
    pub fn metrics(&self) -> Option<Metrics> {
        let outcomes: Vec<_> = self.records.iter().filter_map(|r| r.result.as_ref().ok()).map(|e| e.outcome).collect();
        compute_metrics(&outcomes).ok()
    }
}

/// Plays the batch under `candidate`; infrastructure failures are logged and excluded.
pub fn evaluate_candidate(
    candidate: &TransitionMatrix,
    scenarios: &[CreditCase],
    profiles: &[DebtorProfile],
    engine: &NegotiationEngine,
    stream: &[u64],
) -> Result<CandidateEvaluation, EvaluationError> {
    if scenarios.is_empty() || profiles.is_empty() {
        return Err(EvaluationError::EmptyBatch);
    }
    let records = engine.run_batch(candidate, scenarios, profiles, stream);
    let mut rewards = Vec::with_capacity(records.len());
    let mut failures = 0;
    for r in &records {
        match &r.result {
            Ok(ep) => rewards.push(ep.reward),
            Err(AgentError::Infrastructure(msg)) => {
                failures += 1;
                log::warn!("episode {} / {} excluded: {msg}", r.scenario_id, r.profile);
            }
        }
    }
    let evaluation = Evaluation::from_rewards(rewards, failures)?;
    Ok(CandidateEvaluation { evaluation, records })
}
