use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::agents::{
    scripted_creditor, scripted_debtor, AgentBehavior, AgentContext, AgentError, CreditorConfig, DebtorProfile,
    ProfileLabel,
};
use super::examiner::{Examiner, ScriptedExaminer};
use super::reward::{reward, RewardParams};
use super::types::{validate_settlement, Classification, NegotiationOutcome, TerminalState, Turn};
use crate::emotion::EmotionState;
use crate::scenarios::CreditCase;
use crate::seed::{derive_seed, hash_str, stream};
use crate::TransitionMatrix;

/// Per-episode protocol settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpisodeConfig {
    pub t_max: u32,
    /// Slack `delta` in the settlement check, in days.
    pub settlement_tolerance: u32,
    /// Offers closer than this many days count as agreement.
    pub agreement_tolerance: u32,
    pub initial_emotion: EmotionState,
    pub reward: RewardParams,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            t_max: 30,
            settlement_tolerance: 3,
            agreement_tolerance: 1,
            initial_emotion: EmotionState::Neutral,
            reward: RewardParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Episode {
    pub outcome: NegotiationOutcome,
    pub reward: f64,
    pub transcript: Vec<Turn>,
}

impl Episode {
    pub fn emotions(&self) -> Vec<EmotionState> {
        self.transcript.iter().map(|t| t.creditor_emotion).collect()
    }
}

/// Settled timeline implied by an accepted history: the latest creditor offer,
/// else the latest debtor offer, else the most recent offer anywhere.
pub fn settlement_days(history: &[Turn]) -> Option<u32> {
    let last = history.last()?;
    last.creditor_offer
        .or(last.debtor_offer)
        .or_else(|| history.iter().rev().find_map(|t| t.creditor_offer.or(t.debtor_offer)))
}

fn settlement_is_valid(history: &[Turn], d_final: u32, delta: u32) -> bool {
    let Some(last) = history.last() else { return false };
    let creditor = last.creditor_offer.unwrap_or(d_final);
    let debtor = last.debtor_offer.unwrap_or(creditor);
    validate_settlement(d_final, creditor, debtor, delta)
}

/// Rebuilds the outcome from a finished transcript's examiner labels.
pub fn outcome_from_transcript(history: &[Turn], d_target: u32, t_max: u32) -> Result<NegotiationOutcome, String> {
    let last = history.last().ok_or("empty transcript")?;
    for (i, t) in history.iter().enumerate() {
        if t.round != i as u32 + 1 {
            return Err(format!("turn {} carries round index {}", i + 1, t.round));
        }
        if i + 1 < history.len() && t.classification != Classification::Active {
            return Err(format!("round {} is terminal but the transcript continues", t.round));
        }
    }
    let n = last.round;
    match last.classification {
        Classification::Accepted => {
            let d_final = settlement_days(history).ok_or("accepted without any offer")?;
            Ok(NegotiationOutcome::accepted(n, d_final, d_target))
        }
        Classification::Breakdown => Ok(NegotiationOutcome::failed(TerminalState::Breakdown, n, d_target)),
        Classification::Active if n == t_max => Ok(NegotiationOutcome::failed(TerminalState::Timeout, n, d_target)),
        Classification::Active => Err(format!("transcript stops at round {n} of {t_max} without a terminal state")),
    }
}

/// Plays one episode: the creditor speaks under the current emotion, the
/// debtor answers, the examiner classifies, and the next emotion is drawn
/// from the policy row until a terminal state or `t_max` rounds.
pub fn run_episode<R: Rng + ?Sized>(
    scenario: &CreditCase,
    creditor: &mut dyn AgentBehavior,
    debtor: &mut dyn AgentBehavior,
    examiner: &dyn Examiner,
    policy: &TransitionMatrix,
    config: &EpisodeConfig,
    rng: &mut R,
) -> Result<Episode, AgentError> {
    let t_max = config.t_max.max(1);
    let mut emotion = config.initial_emotion;
    let mut history: Vec<Turn> = Vec::new();

    for round in 1..=t_max {
        let creditor_reply =
            creditor.respond(&AgentContext { scenario, round, history: &history, emotion, counterpart: None })?;
        let debtor_reply = debtor.respond(&AgentContext {
            scenario,
            round,
            history: &history,
            emotion,
            counterpart: Some(&creditor_reply),
        })?;
        history.push(Turn {
            round,
            creditor_emotion: emotion,
            creditor_message: creditor_reply.message,
            creditor_offer: creditor_reply.offer.filter(|&d| d > 0),
            creditor_signal: creditor_reply.signal,
            debtor_message: debtor_reply.message,
            debtor_offer: debtor_reply.offer.filter(|&d| d > 0),
            debtor_signal: debtor_reply.signal,
            classification: Classification::Active,
        });

        let mut state = examiner.classify(&history)?;
        if state == Classification::Accepted {
            let valid = settlement_days(&history)
                .is_some_and(|d| settlement_is_valid(&history, d, config.settlement_tolerance));
            if !valid {
                log::warn!("round {round}: agreement rejected by settlement validation, continuing");
                state = Classification::Active;
            }
        }
        history.last_mut().expect("just pushed").classification = state;

        match state {
            Classification::Accepted => {
                let d_final = settlement_days(&history).expect("validated above");
                return Ok(finish(NegotiationOutcome::accepted(round, d_final, scenario.target_days), history, config));
            }
            Classification::Breakdown => {
                let outcome = NegotiationOutcome::failed(TerminalState::Breakdown, round, scenario.target_days);
                return Ok(finish(outcome, history, config));
            }
            Classification::Active if round < t_max => emotion = policy.sample_next(emotion, rng),
            Classification::Active => {}
        }
    }
    let outcome = NegotiationOutcome::failed(TerminalState::Timeout, t_max, scenario.target_days);
    Ok(finish(outcome, history, config))
}

fn finish(outcome: NegotiationOutcome, transcript: Vec<Turn>, config: &EpisodeConfig) -> Episode {
    Episode { reward: reward(&outcome, &config.reward), outcome, transcript }
}

/// Builds fresh agents for each episode.
pub trait AgentFactory: Send + Sync {
    fn creditor(&self, scenario: &CreditCase, seed: u64) -> Result<Box<dyn AgentBehavior>, AgentError>;
    fn debtor(
        &self,
        scenario: &CreditCase,
        profile: &DebtorProfile,
        seed: u64,
    ) -> Result<Box<dyn AgentBehavior>, AgentError>;
    fn examiner(&self, scenario: &CreditCase) -> Result<Arc<dyn Examiner>, AgentError>;
}

/// Offline agents: scripted creditor, scripted debtors, rule-based examiner.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScriptedAgents {
    pub creditor: CreditorConfig,
    pub agreement_tolerance: u32,
}

impl ScriptedAgents {
    pub fn new(creditor: CreditorConfig, agreement_tolerance: u32) -> Self {
        Self { creditor, agreement_tolerance }
    }
}

impl AgentFactory for ScriptedAgents {
    fn creditor(&self, scenario: &CreditCase, _seed: u64) -> Result<Box<dyn AgentBehavior>, AgentError> {
        Ok(Box::new(scripted_creditor(scenario, &self.creditor)))
    }

    fn debtor(
        &self,
        scenario: &CreditCase,
        profile: &DebtorProfile,
        seed: u64,
    ) -> Result<Box<dyn AgentBehavior>, AgentError> {
        Ok(Box::new(scripted_debtor(profile, scenario, self.agreement_tolerance, stream(seed, &[1]))))
    }

    fn examiner(&self, _scenario: &CreditCase) -> Result<Arc<dyn Examiner>, AgentError> {
        Ok(Arc::new(ScriptedExaminer { agreement_tolerance: self.agreement_tolerance }))
    }
}

/// Result of one (scenario, profile) episode inside a batch.
#[derive(Debug, Clone)]
pub struct EpisodeRecord {
    pub scenario_id: String,
    pub profile: ProfileLabel,
    pub seed: u64,
    pub result: Result<Episode, AgentError>,
}

/// Runs episodes with a shared agent factory and protocol config.
#[derive(Clone)]
pub struct NegotiationEngine {
    agents: Arc<dyn AgentFactory>,
    pub config: EpisodeConfig,
    pub master_seed: u64,
}

impl std::fmt::Debug for NegotiationEngine {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NegotiationEngine")
            .field("config", &self.config)
            .field("master_seed", &self.master_seed)
            .finish_non_exhaustive()
    }
}

impl NegotiationEngine {
    pub fn new(agents: Arc<dyn AgentFactory>, config: EpisodeConfig, master_seed: u64) -> Self {
        Self { agents, config, master_seed }
    }

    pub fn scripted(agents: ScriptedAgents, config: EpisodeConfig, master_seed: u64) -> Self {
        Self::new(Arc::new(agents), config, master_seed)
    }

    /// Seed of the episode for `(stream key, scenario, profile)`.
    pub fn episode_seed(&self, key: &[u64], scenario: &CreditCase, profile: ProfileLabel) -> u64 {
        let mut path = key.to_vec();
        path.push(hash_str(&scenario.case_id));
        path.push(profile as u64);
        derive_seed(self.master_seed, &path)
    }

    pub fn run(
        &self,
        scenario: &CreditCase,
        profile: &DebtorProfile,
        policy: &TransitionMatrix,
        seed: u64,
    ) -> Result<Episode, AgentError> {
        let mut creditor = self.agents.creditor(scenario, seed)?;
        let mut debtor = self.agents.debtor(scenario, profile, seed)?;
        let examiner = self.agents.examiner(scenario)?;
        let mut rng = stream(seed, &[0]);
        run_episode(scenario, creditor.as_mut(), debtor.as_mut(), examiner.as_ref(), policy, &self.config, &mut rng)
    }

    /// One episode per `(scenario, profile)` pair, scenario-major, run in parallel.
    pub fn run_batch(
        &self,
        policy: &TransitionMatrix,
        scenarios: &[CreditCase],
        profiles: &[DebtorProfile],
        key: &[u64],
    ) -> Vec<EpisodeRecord> {
        let pairs: Vec<(&CreditCase, &DebtorProfile)> =
            scenarios.iter().flat_map(|s| profiles.iter().map(move |p| (s, p))).collect();
        pairs
            .into_par_iter()
            .map(|(scenario, profile)| {
                let seed = self.episode_seed(key, scenario, profile.label);
                EpisodeRecord {
                    scenario_id: scenario.case_id.clone(),
                    profile: profile.label,
                    seed,
                    result: self.run(scenario, profile, policy, seed),
                }
            })
            .collect()
    }
}
