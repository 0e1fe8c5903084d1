use super::agents::AgentError;
use super::types::{Classification, Signal, Turn};

/// Decides after every round whether the negotiation is over.
pub trait Examiner: Send + Sync {
    /// `history` includes the round just played; it is never empty.
    fn classify(&self, history: &[Turn]) -> Result<Classification, AgentError>;
}

/// Rule-based examiner for offline runs.
///
/// * a refuse signal in the latest round is a breakdown;
/// * an accept signal in the latest round is an agreement;
/// * offers within `agreement_tolerance` days (strictly) in each of the last
///   two rounds are an agreement;
/// * anything else is still active.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScriptedExaminer {
    pub agreement_tolerance: u32,
}

impl Default for ScriptedExaminer {
    fn default() -> Self {
        Self { agreement_tolerance: 1 }
    }
}

impl ScriptedExaminer {
    fn converged(&self, turn: &Turn) -> bool {
        match (turn.creditor_offer, turn.debtor_offer) {
            (Some(c), Some(d)) => c.abs_diff(d) < self.agreement_tolerance,
            _ => false,
        }
    }

    pub fn classify_turns(&self, history: &[Turn]) -> Classification {
        let Some(last) = history.last() else {
            return Classification::Active;
        };
        if last.has_signal(Signal::Refuse) {
            return Classification::Breakdown;
        }
        if last.has_signal(Signal::Accept) {
            return Classification::Accepted;
        }
        if let [.., prev, last] = history {
            if self.converged(prev) && self.converged(last) {
                return Classification::Accepted;
            }
        }
        Classification::Active
    }
}

impl Examiner for ScriptedExaminer {
    fn classify(&self, history: &[Turn]) -> Result<Classification, AgentError> {
        Ok(self.classify_turns(history))
    }
}
