use serde::{Deserialize, Serialize};

use crate::emotion::EmotionState;

/// How a finished episode ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalState {
    Accepted,
    Breakdown,
    Timeout,
}

impl TerminalState {
    pub fn label(self) -> &'static str {
        match self {
            TerminalState::Accepted => "accepted",
            TerminalState::Breakdown => "breakdown",
            TerminalState::Timeout => "timeout",
        }
    }
}

impl std::fmt::Display for TerminalState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Examiner verdict after a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Active,
    Accepted,
    Breakdown,
}

/// Explicit intent attached to an agent reply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Signal {
    Accept,
    Refuse,
    Concede,
}

/// One creditor/debtor exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Turn {
    pub round: u32,
    pub creditor_emotion: EmotionState,
    pub creditor_message: String,
    pub creditor_offer: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub creditor_signal: Option<Signal>,
    pub debtor_message: String,
    pub debtor_offer: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debtor_signal: Option<Signal>,
    pub classification: Classification,
}

impl Turn {
    pub fn has_signal(&self, signal: Signal) -> bool {
        self.creditor_signal == Some(signal) || self.debtor_signal == Some(signal)
    }
}

/// Terminal summary of an episode; the input to rewards and metrics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NegotiationOutcome {
    pub terminal: TerminalState,
    pub n_rounds: u32,
    pub d_final: Option<u32>,
    pub d_target: u32,
    pub d_extended: Option<u32>,
}

impl NegotiationOutcome {
    pub fn accepted(n_rounds: u32, d_final: u32, d_target: u32) -> Self {
        Self {
            terminal: TerminalState::Accepted,
            n_rounds,
            d_final: Some(d_final),
            d_target,
            d_extended: Some(d_final.saturating_sub(d_target) + 1),
        }
    }

    pub fn failed(terminal: TerminalState, n_rounds: u32, d_target: u32) -> Self {
        debug_assert_ne!(terminal, TerminalState::Accepted);
        Self { terminal, n_rounds, d_final: None, d_target, d_extended: None }
    }

    pub fn is_accepted(&self) -> bool {
        self.terminal == TerminalState::Accepted
    }
}

/// `min(d_c, d_o) <= d_final <= max(d_c, d_o) + delta`.
pub fn validate_settlement(d_final: u32, d_creditor: u32, d_debtor: u32, delta: u32) -> bool {
    d_creditor.min(d_debtor) <= d_final && d_final <= d_creditor.max(d_debtor) + delta
}
