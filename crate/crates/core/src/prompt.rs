//! Prompt rendering for remote agents, offer-marker parsing and the sampling temperature schedule.

use std::collections::BTreeMap;

use crate::emotion::EmotionState;
use crate::negotiation::{Classification, DebtorProfile, ProfileLabel, Turn};
use crate::scenarios::CreditCase;

pub const CREDITOR_TEMPLATE: &str = include_str!("../templates/creditor.txt");
pub const DEBTOR_TEMPLATE: &str = include_str!("../templates/debtor.txt");
pub const EXAMINER_TEMPLATE: &str = include_str!("../templates/examiner.txt");

pub const OFFER_MARKER: &str = "OFFER_DAYS:";
pub const STATE_MARKER: &str = "STATE:";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PromptError {
    #[error("no value for placeholder `{0}`")]
    MissingValue(String),
    #[error("unterminated placeholder starting at byte {0}")]
    Unterminated(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("offer marker with non-integer payload `{0}`")]
pub struct OfferParseError(pub String);

/// Which party a prompt is written for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Creditor,
    Debtor,
    Examiner,
}

/// A template with `{{name}}` placeholders.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub role: Role,
    pub text: String,
}

impl PromptTemplate {
    pub fn builtin(role: Role) -> Self {
        let text = match role {
            Role::Creditor => CREDITOR_TEMPLATE,
            Role::Debtor => DEBTOR_TEMPLATE,
            Role::Examiner => EXAMINER_TEMPLATE,
        };
        Self { role, text: text.to_string() }
    }

    pub fn render(&self, values: &BTreeMap<&str, String>) -> Result<String, PromptError> {
        render(&self.text, values)
    }
}

/// Substitutes every `{{name}}`; any placeholder without a value is an error.
pub fn render(template: &str, values: &BTreeMap<&str, String>) -> Result<String, PromptError> {
    let mut out = String::with_capacity(template.len() + 256);
    let mut rest = template;
    let mut offset = 0;
    while let Some(start) = rest.find("{{") {
        out.push_str(&rest[..start]);
        let after = &rest[start + 2..];
        let end = after.find("}}").ok_or(PromptError::Unterminated(offset + start))?;
        let name = after[..end].trim();
        let value = values.get(name).ok_or_else(|| PromptError::MissingValue(name.to_string()))?;
        out.push_str(value);
        let consumed = start + 2 + end + 2;
        offset += consumed;
        rest = &rest[consumed..];
    }
    out.push_str(rest);
    Ok(out)
}

/// Tone instructions for each creditor emotion.
pub fn emotion_directive(emotion: EmotionState) -> String {
    let body = match emotion {
        EmotionState::Happy => "Sound warm and upbeat. Express optimism that a workable plan is within reach.",
        EmotionState::Surprising => "Express genuine surprise at the state of the account or at the debtor's position.",
        EmotionState::Angry => "Show firm displeasure about the delays. Be assertive, never abusive.",
        EmotionState::Sad => "Convey disappointment and concern about how the situation has developed.",
        EmotionState::Disgust => "Make clear you find the handling of this account unacceptable.",
        EmotionState::Fear => "Express worry about the consequences for both sides if no agreement is reached.",
        EmotionState::Neutral => "Keep a calm, factual and professional tone.",
    };
    format!("EMOTION DIRECTIVE ({}): {body}", emotion.label())
}

fn profile_description(label: ProfileLabel) -> &'static str {
    match label {
        ProfileLabel::Angry => "You are frustrated and react badly to pressure.",
        ProfileLabel::Sad => "You are discouraged and respond to empathy.",
        ProfileLabel::Fearful => "You are anxious about the consequences of default.",
        ProfileLabel::Manipulative => "You try to extract the longest possible timeline and exploit sympathy.",
        ProfileLabel::Cooperative => "You want a quick, fair resolution.",
        ProfileLabel::Defensive => "You feel blamed and resist being cornered.",
        ProfileLabel::Neutral => "You negotiate in a matter-of-fact way.",
    }
}

/// Renders completed turns as numbered dialogue lines, oldest first.
pub fn format_history(history: &[Turn]) -> String {
    if history.is_empty() {
        return "(no messages yet)".to_string();
    }
    let mut out = String::new();
    for t in history {
        out.push_str(&format!(
            "Round {} | Creditor ({}): {}\n",
            t.round,
            t.creditor_emotion,
            t.creditor_message.trim()
        ));
        out.push_str(&format!("Round {} | Debtor: {}\n", t.round, t.debtor_message.trim()));
    }
    out.pop();
    out
}

fn scenario_values(scenario: &CreditCase) -> BTreeMap<&'static str, String> {
    let mut v = BTreeMap::new();
    v.insert("case_id", scenario.case_id.clone());
    v.insert("credit_type", scenario.credit_type.to_string());
    v.insert("collateral", scenario.collateral.to_string());
    v.insert("original_amount", format!("{:.2}", scenario.original_amount));
    v.insert("outstanding_balance", format!("{:.2}", scenario.outstanding_balance));
    v.insert("interest_accrued", format!("{:.2}", scenario.interest_accrued));
    v.insert("days_overdue", scenario.days_overdue.to_string());
    v.insert("recovery_stage", scenario.recovery_stage.to_string());
    v.insert("reason_for_overdue", scenario.reason_for_overdue.to_string());
    v.insert("cash_flow_situation", scenario.cash_flow_situation.to_string());
    v.insert("target_days", scenario.target_days.to_string());
    v
}

pub fn render_creditor_prompt(
    scenario: &CreditCase,
    emotion: EmotionState,
    history: &[Turn],
) -> Result<String, PromptError> {
    let mut v = scenario_values(scenario);
    v.insert("emotion_directive", emotion_directive(emotion));
    v.insert("history", format_history(history));
    render(CREDITOR_TEMPLATE, &v)
}

pub fn render_debtor_prompt(
    scenario: &CreditCase,
    profile: &DebtorProfile,
    history: &[Turn],
) -> Result<String, PromptError> {
    let mut v = scenario_values(scenario);
    let preferred = (profile.timeline_factor * f64::from(scenario.target_days)).round() as u32;
    v.insert("preferred_days", preferred.to_string());
    v.insert("profile", profile.label.to_string());
    v.insert("profile_description", profile_description(profile.label).to_string());
    v.insert("history", format_history(history));
    render(DEBTOR_TEMPLATE, &v)
}

pub fn render_examiner_prompt(scenario: &CreditCase, history: &[Turn]) -> Result<String, PromptError> {
    let mut v = scenario_values(scenario);
    v.insert("history", format_history(history));
    render(EXAMINER_TEMPLATE, &v)
}

pub fn format_offer_marker(days: u32) -> String {
    format!("{OFFER_MARKER} {days}")
}

/// Integer from the last line carrying the offer marker; `None` without a marker.
pub fn parse_offer(text: &str) -> Result<Option<u32>, OfferParseError> {
    let Some(payload) = text.lines().rev().find_map(|line| line.trim().strip_prefix(OFFER_MARKER)) else {
        return Ok(None);
    };
    let payload = payload.trim().trim_end_matches('.');
    payload.parse::<u32>().map(Some).map_err(|_| OfferParseError(payload.to_string()))
}

/// [`parse_offer`], logging and discarding malformed payloads.
pub fn parse_offer_lenient(text: &str) -> Option<u32> {
    parse_offer(text).unwrap_or_else(|e| {
        log::warn!("{e}; treating as no offer");
        None
    })
}

/// Label from the last `STATE:` line of an examiner reply.
pub fn parse_state_label(text: &str) -> Option<Classification> {
    let payload = text.lines().rev().find_map(|line| line.trim().strip_prefix(STATE_MARKER))?;
    match payload.trim().trim_end_matches('.').to_ascii_lowercase().as_str() {
        "accepted" | "accept" | "settled" => Some(Classification::Accepted),
        "breakdown" | "stalemate" => Some(Classification::Breakdown),
        "active" => Some(Classification::Active),
        _ => None,
    }
}

/// Decaying sampling temperature `max(floor, initial * (1 - decay)^round)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TemperatureSchedule {
    pub initial: f64,
    pub decay: f64,
    pub floor: f64,
}

impl Default for TemperatureSchedule {
    fn default() -> Self {
        Self { initial: 0.7, decay: 0.05, floor: 0.1 }
    }
}

impl TemperatureSchedule {
    pub fn at(&self, round: u32) -> f64 {
        (self.initial * (1.0 - self.decay).powi(round as i32)).max(self.floor)
    }
}

pub fn temperature_at(round: u32) -> f64 {
    TemperatureSchedule::default().at(round)
}
