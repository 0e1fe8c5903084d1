use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Number of creditor emotion states.
pub const NUM_EMOTIONS: usize = 7;

/// A displayed creditor emotion. The discriminant is the row/column index used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmotionState {
    Happy = 0,
    Surprising = 1,
    Angry = 2,
    Sad = 3,
    Disgust = 4,
    Fear = 5,
    Neutral = 6,
}

impl EmotionState {
    pub const ALL: [EmotionState; NUM_EMOTIONS] = [
        EmotionState::Happy,
        EmotionState::Surprising,
        EmotionState::Angry,
        EmotionState::Sad,
        EmotionState::Disgust,
        EmotionState::Fear,
        EmotionState::Neutral,
    ];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Self> {
        Self::ALL.get(index).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            EmotionState::Happy => "happy",
            EmotionState::Surprising => "surprising",
            EmotionState::Angry => "angry",
            EmotionState::Sad => "sad",
            EmotionState::Disgust => "disgust",
            EmotionState::Fear => "fear",
            EmotionState::Neutral => "neutral",
        }
    }

    /// Short column heading (H, S, A, Sd, D, F, N).
    pub fn abbreviation(self) -> &'static str {
        match self {
            EmotionState::Happy => "H",
            EmotionState::Surprising => "S",
            EmotionState::Angry => "A",
            EmotionState::Sad => "Sd",
            EmotionState::Disgust => "D",
            EmotionState::Fear => "F",
            EmotionState::Neutral => "N",
        }
    }
}

impl fmt::Display for EmotionState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown emotion label `{0}`")]
pub struct UnknownEmotion(pub String);

impl FromStr for EmotionState {
    type Err = UnknownEmotion;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Self::ALL.iter().copied().find(|e| e.label() == lower).ok_or_else(|| UnknownEmotion(s.to_string()))
    }
}
