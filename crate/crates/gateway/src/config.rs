use std::path::Path;
use std::time::Duration;

use emotune::prompt::TemperatureSchedule;
use serde::{Deserialize, Serialize};

use crate::ChatError;

pub const DEFAULT_CREDENTIAL_ENV: &str = "EMOTUNE_API_KEY";

/// How remote episodes decide terminal states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExaminerMode {
    /// Offer markers and explicit signals only; no model call.
    #[default]
    Scripted,
    /// Rules first; while they report an active negotiation, the examiner prompt decides.
    Remote,
}

/// Endpoint settings. The credential itself is never stored here, only the
/// name of the environment variable holding it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EndpointConfig {
    /// Base URL; requests go to `{base_url}/chat/completions`.
    pub base_url: String,
    pub model: String,
    pub credential_env: String,
    pub max_in_flight: usize,
    pub timeout_secs: f64,
    /// Total attempts per call, including the first.
    pub max_attempts: u32,
    /// Delay before the first retry; doubles after each failed attempt.
    pub initial_backoff_ms: u64,
    pub max_tokens: u32,
    pub temperature: TemperatureSchedule,
    pub examiner: ExaminerMode,
}

impl Default for EndpointConfig {
    fn default() -> Self {
        Self {
            base_url: "https://api.openai.com/v1".into(),
            model: "gpt-4o-mini".into(),
            credential_env: DEFAULT_CREDENTIAL_ENV.into(),
            max_in_flight: 4,
            timeout_secs: 60.0,
            max_attempts: 3,
            initial_backoff_ms: 500,
            max_tokens: 400,
            temperature: TemperatureSchedule::default(),
            examiner: ExaminerMode::default(),
        }
    }
}

impl EndpointConfig {
    pub fn from_json(text: &str) -> Result<Self, ChatError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| ChatError::Config(format!("endpoint config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ChatError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ChatError::Config(format!("cannot read endpoint config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ChatError> {
        let bad = |m: String| Err(ChatError::Config(m));
        if !(self.base_url.starts_with("http://") || self.base_url.starts_with("https://")) {
            return bad(format!("base_url must be an http(s) URL, got `{}`", self.base_url));
        }
        if self.model.trim().is_empty() {
            return bad("model name is empty".into());
        }
        if self.credential_env.trim().is_empty() {
            return bad("credential_env is empty".into());
        }
        if self.max_in_flight == 0 || self.max_attempts == 0 {
            return bad("max_in_flight and max_attempts must be at least 1".into());
        }
        if !(self.timeout_secs > 0.0 && self.timeout_secs.is_finite()) {
            return bad(format!("timeout_secs must be positive, got {}", self.timeout_secs));
        }
        Ok(())
    }

    pub fn endpoint_url(&self) -> String {
        format!("{}/chat/completions", self.base_url.trim_end_matches('/'))
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_secs)
    }

    /// Delay after failed attempt number `attempt` (1-based).
    pub fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.initial_backoff_ms.saturating_mul(1 << attempt.saturating_sub(1).min(16)))
    }
}
