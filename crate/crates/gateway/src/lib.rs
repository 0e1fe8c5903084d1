//! Remote negotiation agents over a chat-completions endpoint.
//!
//! Everything here is optional: the scripted agents in `emotune` run the
//! whole pipeline offline. A [`ChatClient`] wraps one endpoint with bounded
//! retries, a per-call timeout and an in-flight cap; [`RemoteAgents`] plugs it
//! into the negotiation engine.

mod agents;
mod client;
mod config;

pub use agents::{RemoteAgents, RemoteCreditor, RemoteDebtor, RemoteExaminer};
pub use client::{parse_response, ChatClient, ChatError, ChatMessage, ChatRequest, ChatResponse, Usage};
pub use config::{EndpointConfig, ExaminerMode, DEFAULT_CREDENTIAL_ENV};
