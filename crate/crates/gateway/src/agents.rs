use std::sync::Arc;

use emotune::negotiation::{
    AgentBehavior, AgentContext, AgentError, AgentFactory, Classification, DebtorProfile, Examiner, Reply,
    ScriptedExaminer, Signal, Turn,
};
use emotune::prompt::{
    parse_offer_lenient, parse_state_label, render_creditor_prompt, render_debtor_prompt, render_examiner_prompt,
    PromptError,
};
use emotune::scenarios::CreditCase;

use crate::client::{ChatClient, ChatError, ChatMessage};
use crate::config::ExaminerMode;

fn infra(e: ChatError) -> AgentError {
    AgentError::Infrastructure(e.to_string())
}

fn prompt_failure(e: PromptError) -> AgentError {
    AgentError::Infrastructure(format!("prompt rendering: {e}"))
}

/// Agents backed by a chat-completions endpoint. One client is shared by
/// every episode so the in-flight cap applies across the whole batch.
#[derive(Debug, Clone)]
pub struct RemoteAgents {
    client: Arc<ChatClient>,
    agreement_tolerance: u32,
}

impl RemoteAgents {
    pub fn new(client: Arc<ChatClient>, agreement_tolerance: u32) -> Self {
        Self { client, agreement_tolerance }
    }

    pub fn client(&self) -> &ChatClient {
        &self.client
    }
}

impl AgentFactory for RemoteAgents {
    fn creditor(&self, _scenario: &CreditCase, _seed: u64) -> Result<Box<dyn AgentBehavior>, AgentError> {
        Ok(Box::new(RemoteCreditor { client: self.client.clone() }))
    }

    fn debtor(
        &self,
        _scenario: &CreditCase,
        profile: &DebtorProfile,
        _seed: u64,
    ) -> Result<Box<dyn AgentBehavior>, AgentError> {
        Ok(Box::new(RemoteDebtor { client: self.client.clone(), profile: profile.clone() }))
    }

    fn examiner(&self, scenario: &CreditCase) -> Result<Arc<dyn Examiner>, AgentError> {
        let rules = ScriptedExaminer { agreement_tolerance: self.agreement_tolerance };
        Ok(match self.client.config().examiner {
            ExaminerMode::Scripted => Arc::new(rules),
            ExaminerMode::Remote => {
                Arc::new(RemoteExaminer { client: self.client.clone(), scenario: scenario.clone(), rules })
            }
        })
    }
}

/// Creditor speaking under the emotion directive of each round.
#[derive(Debug)]
pub struct RemoteCreditor {
    client: Arc<ChatClient>,
}

impl AgentBehavior for RemoteCreditor {
    fn respond(&mut self, ctx: &AgentContext<'_>) -> Result<Reply, AgentError> {
        let prompt = render_creditor_prompt(ctx.scenario, ctx.emotion, ctx.history).map_err(prompt_failure)?;
        let temperature = self.client.config().temperature.at(ctx.round - 1);
        let response =
            self.client.chat(&self.client.request(vec![ChatMessage::user(prompt)], temperature)).map_err(infra)?;
        let offer = parse_offer_lenient(&response.content);
        Ok(Reply { message: response.content, offer, signal: None })
    }
}

/// Debtor answering the creditor's message of the current round.
#[derive(Debug)]
pub struct RemoteDebtor {
    client: Arc<ChatClient>,
    profile: DebtorProfile,
}

impl AgentBehavior for RemoteDebtor {
    fn respond(&mut self, ctx: &AgentContext<'_>) -> Result<Reply, AgentError> {
        let system = render_debtor_prompt(ctx.scenario, &self.profile, ctx.history).map_err(prompt_failure)?;
        let creditor = ctx.counterpart.map(|r| r.message.as_str()).unwrap_or_default();
        let messages = vec![ChatMessage::system(system), ChatMessage::user(creditor)];
        let temperature = self.client.config().temperature.at(ctx.round - 1);
        let response = self.client.chat(&self.client.request(messages, temperature)).map_err(infra)?;
        let offer = parse_offer_lenient(&response.content);
        let creditor_offer = ctx.counterpart.and_then(|r| r.offer);
        Ok(Reply { signal: accept_signal(&response.content, offer, creditor_offer), message: response.content, offer })
    }
}

/// An explicit acceptance repeats the creditor's offer and says so.
fn accept_signal(text: &str, offer: Option<u32>, creditor_offer: Option<u32>) -> Option<Signal> {
    let repeats = offer.is_some() && offer == creditor_offer;
    (repeats && text.to_ascii_lowercase().contains("accept")).then_some(Signal::Accept)
}

/// Rule-based classification first; the examiner prompt only settles rounds
/// the rules consider still active.
#[derive(Debug)]
pub struct RemoteExaminer {
    client: Arc<ChatClient>,
    scenario: CreditCase,
    rules: ScriptedExaminer,
}

impl Examiner for RemoteExaminer {
    fn classify(&self, history: &[Turn]) -> Result<Classification, AgentError> {
        let ruled = self.rules.classify_turns(history);
        if ruled != Classification::Active {
            return Ok(ruled);
        }
        let prompt = render_examiner_prompt(&self.scenario, history).map_err(prompt_failure)?;
        let response = self.client.chat(&self.client.request(vec![ChatMessage::user(prompt)], 0.0)).map_err(infra)?;
        Ok(parse_state_label(&response.content).unwrap_or_else(|| {
            log::warn!("examiner reply without a state label; treating the negotiation as active");
            Classification::Active
        }))
    }
}
