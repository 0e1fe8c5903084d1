//! The agent interface and the deterministic scripted agents.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::types::{Signal, Turn};
use crate::emotion::{EmotionState, NUM_EMOTIONS};
use crate::prompt::format_offer_marker;
use crate::scenarios::CreditCase;

/// What an agent sees when it is asked to speak.
#[derive(Debug, Clone, Copy)]
pub struct AgentContext<'a> {
    pub scenario: &'a CreditCase,
    /// 1-based round index.
    pub round: u32,
    /// Completed turns before this round.
    pub history: &'a [Turn],
    /// The creditor's emotion this round: a directive for the creditor, an observation for the debtor.
    pub emotion: EmotionState,
    /// The creditor's reply this round, present only when the debtor is asked.
    pub counterpart: Option<&'a Reply>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Reply {
    pub message: String,
    pub offer: Option<u32>,
    pub signal: Option<Signal>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AgentError {
    /// Failure outside the negotiation itself (network, endpoint, configuration).
    #[error("infrastructure failure: {0}")]
    Infrastructure(String),
}

/// A negotiating party.
pub trait AgentBehavior: Send {
    fn respond(&mut self, ctx: &AgentContext<'_>) -> Result<Reply, AgentError>;
}

/// Creditor that opens at the scenario target and raises its offer at a fixed rate.
#[derive(Debug, Clone)]
pub struct ScriptedCreditor {
    target: u32,
    rate: u32,
    cap: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CreditorConfig {
    /// Days added to the offer each round.
    pub concession_rate: u32,
    /// Offers never exceed `cap_factor * target_days`.
    pub cap_factor: f64,
}

impl Default for CreditorConfig {
    fn default() -> Self {
        Self { concession_rate: 1, cap_factor: 2.0 }
    }
}

pub fn scripted_creditor(scenario: &CreditCase, config: &CreditorConfig) -> ScriptedCreditor {
    let target = scenario.target_days.max(1);
    let cap = ((f64::from(target) * config.cap_factor).round() as u32).max(target);
    ScriptedCreditor { target, rate: config.concession_rate, cap }
}

impl ScriptedCreditor {
    pub fn offer_for_round(&self, round: u32) -> u32 {
        let raised = u64::from(self.target) + u64::from(self.rate) * u64::from(round.saturating_sub(1));
        raised.min(u64::from(self.cap)) as u32
    }
}

pub(crate) fn creditor_line(emotion: EmotionState) -> &'static str {
    match emotion {
        EmotionState::Happy => "I'm glad we're talking and I'm confident we can settle this together.",
        EmotionState::Surprising => "Honestly, I didn't expect the account to still be open at this point.",
        EmotionState::Angry => "This has gone on far too long and the delays are unacceptable.",
        EmotionState::Sad => "It's disappointing for both of us that things have come to this.",
        EmotionState::Disgust => "Frankly, the way this account has been handled is hard to accept.",
        EmotionState::Fear => "I'm worried about what happens to this account if we can't agree soon.",
        EmotionState::Neutral => "Let's look at the numbers and find a workable repayment timeline.",
    }
}

impl AgentBehavior for ScriptedCreditor {
    fn respond(&mut self, ctx: &AgentContext<'_>) -> Result<Reply, AgentError> {
        let offer = self.offer_for_round(ctx.round);
        let message = format!(
            "[{}] {} We can accept full repayment within {offer} days.\n{}",
            ctx.emotion.label(),
            creditor_line(ctx.emotion),
            format_offer_marker(offer)
        );
        Ok(Reply { message, offer: Some(offer), signal: None })
    }
}

/// Debtor personality labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileLabel {
    Angry,
    Sad,
    Fearful,
    Manipulative,
    Cooperative,
    Defensive,
    Neutral,
}

impl ProfileLabel {
    pub const ALL: [ProfileLabel; 7] = [
        ProfileLabel::Angry,
        ProfileLabel::Sad,
        ProfileLabel::Fearful,
        ProfileLabel::Manipulative,
        ProfileLabel::Cooperative,
        ProfileLabel::Defensive,
        ProfileLabel::Neutral,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ProfileLabel::Angry => "angry",
            ProfileLabel::Sad => "sad",
            ProfileLabel::Fearful => "fearful",
            ProfileLabel::Manipulative => "manipulative",
            ProfileLabel::Cooperative => "cooperative",
            ProfileLabel::Defensive => "defensive",
            ProfileLabel::Neutral => "neutral",
        }
    }
}

impl std::fmt::Display for ProfileLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for ProfileLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.iter().copied().find(|p| p.label() == s).ok_or_else(|| format!("unknown debtor profile `{s}`"))
    }
}

/// Parameters of a scripted debtor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebtorProfile {
    pub label: ProfileLabel,
    /// Days conceded per round, indexed by the creditor's displayed emotion.
    pub weights: [f64; NUM_EMOTIONS],
    /// Opening position as a multiple of the creditor's target timeline.
    pub timeline_factor: f64,
    /// Creditor emotions the debtor will not tolerate for long.
    pub aversion: Vec<EmotionState>,
    /// Consecutive aversive rounds that end the negotiation.
    pub patience: u32,
    /// Relative concession noise: each concession is scaled by `1 + U(-jitter, jitter)`.
    pub jitter: f64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid debtor profile {label}: {reason}")]
pub struct ProfileError {
    pub label: ProfileLabel,
    pub reason: String,
}

impl DebtorProfile {
    pub fn validate(&self) -> Result<(), ProfileError> {
        let fail = |reason: String| Err(ProfileError { label: self.label, reason });
        if self.weights.iter().any(|w| !w.is_finite()) {
            return fail("concession weights must be finite".into());
        }
        if self.patience < 1 {
            return fail("patience must be at least 1".into());
        }
        if !(self.timeline_factor.is_finite() && self.timeline_factor > 0.0) {
            return fail(format!("timeline factor must be positive, got {}", self.timeline_factor));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return fail(format!("jitter must be in [0, 1), got {}", self.jitter));
        }
        Ok(())
    }

    /// The seven built-in debtor personalities.
    ///
    /// Weight columns follow `EmotionState` order: happy, surprising, angry, sad, disgust, fear, neutral.
    pub fn standard_suite() -> Vec<DebtorProfile> {
        use EmotionState::*;
        let p = |label, weights, timeline_factor, aversion: &[EmotionState], patience| DebtorProfile {
            label,
            weights,
            timeline_factor,
            aversion: aversion.to_vec(),
            patience,
            jitter: 0.25,
        };
        // Each profile dislikes a different triple of emotions; every pair of triples shares exactly one.
        let w = [4.0, 2.0, 1.0, 3.0, 0.0, 0.0, 4.0];
        vec![
            p(ProfileLabel::Angry, w, 2.05, &[Neutral, Happy, Angry], 6),
            p(ProfileLabel::Sad, w, 2.05, &[Sad, Disgust, Neutral], 6),
            p(ProfileLabel::Fearful, w, 2.05, &[Angry, Sad, Fear], 6),
            p(ProfileLabel::Manipulative, w, 2.05, &[Surprising, Angry, Disgust], 6),
            p(ProfileLabel::Cooperative, w, 2.05, &[Happy, Surprising, Sad], 6),
            p(ProfileLabel::Defensive, w, 2.05, &[Disgust, Fear, Happy], 6),
            p(ProfileLabel::Neutral, w, 2.05, &[Fear, Neutral, Surprising], 6),
        ]
    }
}

/// Scripted debtor state for one episode.
#[derive(Debug, Clone)]
pub struct ScriptedDebtor {
    profile: DebtorProfile,
    preferred: f64,
    aversive_streak: u32,
    agreement_tolerance: u32,
    rng: ChaCha8Rng,
}

pub fn scripted_debtor(
    profile: &DebtorProfile,
    scenario: &CreditCase,
    agreement_tolerance: u32,
    rng: ChaCha8Rng,
) -> ScriptedDebtor {
    let opening = (profile.timeline_factor * f64::from(scenario.target_days)).round().max(1.0);
    ScriptedDebtor { profile: profile.clone(), preferred: opening, aversive_streak: 0, agreement_tolerance, rng }
}

impl ScriptedDebtor {
    pub fn preferred_days(&self) -> f64 {
        self.preferred
    }
}

fn debtor_line(label: ProfileLabel) -> &'static str {
    match label {
        ProfileLabel::Angry => "You people keep pushing and it isn't helping.",
        ProfileLabel::Sad => "Things have been really hard for the business lately.",
        ProfileLabel::Fearful => "I'm scared of what happens if I commit to something I can't meet.",
        ProfileLabel::Manipulative => "Other lenders have been far more flexible with us.",
        ProfileLabel::Cooperative => "I want to get this resolved as much as you do.",
        ProfileLabel::Defensive => "The delay wasn't our fault and I won't be cornered.",
        ProfileLabel::Neutral => "Let's see what timeline works on both sides.",
    }
}

impl AgentBehavior for ScriptedDebtor {
    fn respond(&mut self, ctx: &AgentContext<'_>) -> Result<Reply, AgentError> {
        let emotion = ctx.emotion;
        let creditor_offer = ctx.counterpart.and_then(|r| r.offer);
        let jitter = if self.profile.jitter > 0.0 {
            self.rng.random_range(-self.profile.jitter..self.profile.jitter)
        } else {
            0.0
        };

        if self.profile.aversion.contains(&emotion) {
            self.aversive_streak += 1;
        } else {
            self.aversive_streak = 0;
        }
        let current = self.preferred.round().max(1.0) as u32;
        if self.aversive_streak >= self.profile.patience {
            return Ok(Reply {
                message: format!("[refuse] I'm not continuing this conversation.\n{}", format_offer_marker(current)),
                offer: Some(current),
                signal: Some(Signal::Refuse),
            });
        }

        let concession = (self.profile.weights[emotion.index()] * (1.0 + jitter)).max(0.0);
        let mut preferred = (self.preferred - concession).max(1.0);
        if let Some(c) = creditor_offer {
            preferred = preferred.max(f64::from(c));
        }
        self.preferred = preferred;
        let offer = preferred.round().max(1.0) as u32;

        if let Some(c) = creditor_offer {
            if (preferred - f64::from(c)).abs() <= f64::from(self.agreement_tolerance) {
                return Ok(Reply {
                    message: format!("[accept] Agreed, {c} days works for us.\n{}", format_offer_marker(c)),
                    offer: Some(c),
                    signal: Some(Signal::Accept),
                });
            }
        }
        let signal = (concession > 0.0).then_some(Signal::Concede);
        Ok(Reply {
            message: format!(
                "[{}] {} We could manage {offer} days.\n{}",
                self.profile.label,
                debtor_line(self.profile.label),
                format_offer_marker(offer)
            ),
            offer: Some(offer),
            signal,
        })
    }
}
