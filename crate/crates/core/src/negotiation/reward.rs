use serde::{Deserialize, Serialize};

use super::types::NegotiationOutcome;

/// Shape of the success branch of the reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardForm {
    /// `-scale * d_extended * ln(n_rounds + 1)`
    #[default]
    Product,
    /// `-scale * ln(n_rounds + 1) / d_extended`
    Quotient,
}

impl std::str::FromStr for RewardForm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "product" => Ok(RewardForm::Product),
            "quotient" => Ok(RewardForm::Quotient),
            other => Err(format!("unknown reward form `{other}` (expected product or quotient)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RewardParams {
    pub form: RewardForm,
    pub scale: f64,
    /// Penalty magnitude for breakdowns and timeouts, in days.
    pub d_max: f64,
}

impl Default for RewardParams {
    fn default() -> Self {
        Self { form: RewardForm::Product, scale: 1.0, d_max: 365.0 }
    }
}

/// Reward of a terminal outcome; always `<= 0`, larger is better.
pub fn reward(outcome: &NegotiationOutcome, params: &RewardParams) -> f64 {
    match outcome.d_extended {
        Some(extended) if outcome.is_accepted() => {
            let rounds = (f64::from(outcome.n_rounds) + 1.0).ln();
            let extended = f64::from(extended);
            match params.form {
                RewardForm::Product => -params.scale * extended * rounds,
                RewardForm::Quotient => -params.scale * rounds / extended,
            }
        }
        _ => -params.d_max,
    }
}

/// Success rate, collection efficiency and negotiation speed over a set of outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub episodes: usize,
    pub accepted: usize,
    /// Percentage of accepted episodes.
    pub success_rate: f64,
    /// Mean `d_final / d_target` over accepted episodes; absent when none were accepted.
    pub collection_efficiency: Option<f64>,
    /// Mean rounds over all episodes.
    pub negotiation_speed: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("metrics need at least one outcome")]
pub struct EmptyOutcomes;

pub fn compute_metrics(outcomes: &[NegotiationOutcome]) -> Result<Metrics, EmptyOutcomes> {
    if outcomes.is_empty() {
        return Err(EmptyOutcomes);
    }
    let ratios: Vec<f64> = outcomes
        .iter()
        .filter_map(|o| match (o.is_accepted(), o.d_final) {
            (true, Some(d)) => Some(f64::from(d) / f64::from(o.d_target)),
            _ => None,
        })
        .collect();
    let accepted = ratios.len();
    let rounds: u64 = outcomes.iter().map(|o| u64::from(o.n_rounds)).sum();
    Ok(Metrics {
        episodes: outcomes.len(),
        accepted,
        success_rate: 100.0 * accepted as f64 / outcomes.len() as f64,
        collection_efficiency: (accepted > 0).then(|| ratios.iter().sum::<f64>() / accepted as f64),
        negotiation_speed: rounds as f64 / outcomes.len() as f64,
    })
}
