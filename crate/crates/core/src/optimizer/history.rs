use serde::{Deserialize, Serialize};

use crate::emotion::export::policy_hash;
use crate::TransitionMatrix;

/// One evaluated candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub iteration: usize,
    pub candidate: usize,
    pub policy_hash: String,
    pub strategy: Vec<f64>,
    pub mean_reward: f64,
    pub episode_rewards: Vec<f64>,
}

/// Append-only record of every evaluated strategy.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    entries: Vec<HistoryEntry>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(
        &mut self,
        iteration: usize,
        candidate: usize,
        policy: &TransitionMatrix,
        mean_reward: f64,
        episode_rewards: Vec<f64>,
    ) {
        self.entries.push(HistoryEntry {
            iteration,
            candidate,
            policy_hash: policy_hash(policy),
            strategy: policy.flatten().into_inner(),
            mean_reward,
            episode_rewards,
        });
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn best(&self) -> Option<&HistoryEntry> {
        self.entries.iter().fold(None, |best: Option<&HistoryEntry>, e| match best {
            Some(b) if b.mean_reward >= e.mean_reward => Some(b),
            _ => Some(e),
        })
    }

    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("history entry serializes"));
            out.push('\n');
        }
        out
    }

    pub fn from_jsonl(text: &str) -> Result<Self, serde_json::Error> {
        let entries =
            text.lines().filter(|l| !l.trim().is_empty()).map(serde_json::from_str).collect::<Result<_, _>>()?;
        Ok(Self { entries })
    }
}
