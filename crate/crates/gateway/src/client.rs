use std::sync::{Condvar, Mutex};
use std::thread;

use serde::{Deserialize, Serialize};

use crate::config::EndpointConfig;

#[derive(Debug, thiserror::Error)]
pub enum ChatError {
    /// Raised before any network activity.
    #[error("configuration error: {0}")]
    Config(String),
    #[error("request timed out after {attempts} attempt(s)")]
    Timeout { attempts: u32 },
    #[error("endpoint returned status {status} after {attempts} attempt(s): {body}")]
    Status { status: u16, body: String, attempts: u32 },
    #[error("transport error after {attempts} attempt(s): {message}")]
    Transport { message: String, attempts: u32 },
    #[error("malformed response body: {0}")]
    Malformed(String),
}

impl ChatError {
    fn retryable(&self) -> bool {
        match self {
            ChatError::Timeout { .. } | ChatError::Transport { .. } => true,
            ChatError::Status { status, .. } => *status == 429 || *status >= 500,
            ChatError::Config(_) | ChatError::Malformed(_) => false,
        }
    }

    fn with_attempts(self, n: u32) -> Self {
        match self {
            ChatError::Timeout { .. } => ChatError::Timeout { attempts: n },
            ChatError::Status { status, body, .. } => ChatError::Status { status, body, attempts: n },
            ChatError::Transport { message, .. } => ChatError::Transport { message, attempts: n },
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: "user".into(), content: content.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub fn validate(&self) -> Result<(), ChatError> {
        if self.messages.is_empty() {
            return Err(ChatError::Config("chat request has no messages".into()));
        }
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(ChatError::Config(format!("temperature {} outside [0, 2]", self.temperature)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Usage {
    #[serde(default)]
    pub prompt_tokens: u64,
    #[serde(default)]
    pub completion_tokens: u64,
    #[serde(default)]
    pub total_tokens: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChatResponse {
    pub content: String,
    pub finish_reason: Option<String>,
    pub usage: Usage,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
    #[serde(default)]
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct WireChoice {
    message: WireMessage,
    #[serde(default)]
    finish_reason: Option<String>,
}

#[derive(Deserialize)]
struct WireMessage {
    #[serde(default)]
    content: Option<String>,
}

pub fn parse_response(body: &str) -> Result<ChatResponse, ChatError> {
    let wire: WireResponse = serde_json::from_str(body).map_err(|e| ChatError::Malformed(e.to_string()))?;
    let choice = wire.choices.into_iter().next().ok_or_else(|| ChatError::Malformed("no choices".into()))?;
    let content = choice.message.content.ok_or_else(|| ChatError::Malformed("choice without content".into()))?;
    Ok(ChatResponse { content, finish_reason: choice.finish_reason, usage: wire.usage.unwrap_or_default() })
}

/// Counting semaphore bounding concurrent calls.
#[derive(Debug)]
struct InFlight {
    active: Mutex<usize>,
    freed: Condvar,
    cap: usize,
}

struct Permit<'a>(&'a InFlight);

impl InFlight {
    fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().expect("in-flight lock");
        while *active >= self.cap {
            active = self.freed.wait(active).expect("in-flight lock");
        }
        *active += 1;
        Permit(self)
    }
}

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.active.lock().expect("in-flight lock") -= 1;
        self.0.freed.notify_one();
    }
}

/// Blocking chat-completions client with retries and an in-flight cap.
pub struct ChatClient {
    config: EndpointConfig,
    credential: String,
    agent: ureq::Agent,
    in_flight: InFlight,
}

impl std::fmt::Debug for ChatClient {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ChatClient").field("config", &self.config).finish_non_exhaustive()
    }
}

impl ChatClient {
    /// Reads the credential from the environment variable named in `config`.
    pub fn from_env(config: EndpointConfig) -> Result<Self, ChatError> {
        config.validate()?;
        let credential = std::env::var(&config.credential_env)
            .ok()
            .filter(|v| !v.trim().is_empty())
            .ok_or_else(|| ChatError::Config(format!("credential variable {} is not set", config.credential_env)))?;
        Self::new(config, credential)
    }

    pub fn new(config: EndpointConfig, credential: String) -> Result<Self, ChatError> {
        config.validate()?;
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout()))
            .http_status_as_error(false)
            .build()
            .into();
        let in_flight = InFlight { active: Mutex::new(0), freed: Condvar::new(), cap: config.max_in_flight };
        Ok(Self { config, credential, agent, in_flight })
    }

    pub fn config(&self) -> &EndpointConfig {
        &self.config
    }

    /// Request with the configured model and token limit.
    pub fn request(&self, messages: Vec<ChatMessage>, temperature: f64) -> ChatRequest {
        ChatRequest { model: self.config.model.clone(), messages, temperature, max_tokens: self.config.max_tokens }
    }

    pub fn chat(&self, request: &ChatRequest) -> Result<ChatResponse, ChatError> {
        request.validate()?;
        let _permit = self.in_flight.acquire();
        let mut attempt = 1;
        loop {
            match self.attempt(request) {
                Ok(response) => {
                    log::debug!(
                        "chat ok: {} prompt + {} completion tokens",
                        response.usage.prompt_tokens,
                        response.usage.completion_tokens
                    );
                    return Ok(response);
                }
                Err(e) if e.retryable() && attempt < self.config.max_attempts => {
                    let delay = self.config.backoff(attempt);
                    log::warn!("chat attempt {attempt} failed ({e}); retrying in {delay:?}");
                    thread::sleep(delay);
                    attempt += 1;
                }
                Err(e) => return Err(e.with_attempts(attempt)),
            }
        }
    }

    fn attempt(&self, request: &ChatRequest) -> Result<ChatResponse, ChatError> {
        let result = self
            .agent
            .post(&self.config.endpoint_url())
            .header("Authorization", &format!("Bearer {}", self.credential))
            .send_json(request);
        let mut response = match result {
            Ok(r) => r,
            Err(ureq::Error::Timeout(_)) => return Err(ChatError::Timeout { attempts: 1 }),
            Err(e) => return Err(ChatError::Transport { message: e.to_string(), attempts: 1 }),
        };
        let status = response.status().as_u16();
        let body = match response.body_mut().read_to_string() {
            Ok(b) => b,
            Err(ureq::Error::Timeout(_)) => return Err(ChatError::Timeout { attempts: 1 }),
            Err(e) => return Err(ChatError::Transport { message: e.to_string(), attempts: 1 }),
        };
        if !(200..300).contains(&status) {
            return Err(ChatError::Status { status, body: truncate(&body, 500), attempts: 1 });
        }
        parse_response(&body)
    }
}

fn truncate(s: &str, max: usize) -> String {
    match s.char_indices().nth(max) {
        Some((i, _)) => format!("{}...", &s[..i]),
        None => s.to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_first_choice() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hi"},"finish_reason":"stop"}],
                      "usage":{"prompt_tokens":3,"completion_tokens":1,"total_tokens":4}}"#;
        let r = parse_response(body).unwrap();
        assert_eq!(r.content, "hi");
        assert_eq!(r.finish_reason.as_deref(), Some("stop"));
        assert_eq!(r.usage.total_tokens, 4);
    }

    #[test]
    fn malformed_bodies_are_distinct() {
        assert!(matches!(parse_response("not json"), Err(ChatError::Malformed(_))));
        assert!(matches!(parse_response(r#"{"choices":[]}"#), Err(ChatError::Malformed(_))));
    }

    #[test]
    fn request_bounds() {
        let ok =
            ChatRequest { model: "m".into(), messages: vec![ChatMessage::user("x")], temperature: 0.7, max_tokens: 10 };
        assert!(ok.validate().is_ok());
        assert!(ChatRequest { temperature: 2.5, ..ok.clone() }.validate().is_err());
        assert!(ChatRequest { messages: vec![], ..ok }.validate().is_err());
    }

    #[test]
    fn backoff_doubles() {
        let c = EndpointConfig { initial_backoff_ms: 100, ..Default::default() };
        assert_eq!(c.backoff(1).as_millis(), 100);
        assert_eq!(c.backoff(2).as_millis(), 200);
        assert_eq!(c.backoff(3).as_millis(), 400);
    }
}
