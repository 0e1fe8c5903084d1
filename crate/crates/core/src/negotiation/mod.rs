//! Creditor/debtor negotiation episodes, examiner rules, rewards and metrics.

mod agents;
mod episode;
mod examiner;
mod reward;
pub mod transcript;
mod types;

pub use agents::{
    scripted_creditor, scripted_debtor, AgentBehavior, AgentContext, AgentError, CreditorConfig, DebtorProfile,
    ProfileError, ProfileLabel, Reply, ScriptedCreditor, ScriptedDebtor,
};
pub use episode::{
    outcome_from_transcript, run_episode, settlement_days, AgentFactory, Episode, EpisodeConfig, EpisodeRecord,
    NegotiationEngine, ScriptedAgents,
};
pub use examiner::{Examiner, ScriptedExaminer};
pub use reward::{compute_metrics, reward, EmptyOutcomes, Metrics, RewardForm, RewardParams};
pub use types::{validate_settlement, Classification, NegotiationOutcome, Signal, TerminalState, Turn};
