use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::prompt::{correction_prompt, parse_reply, render_phase_prompt, render_reply, system_prompt};
use super::transcript::TranscriptStore;
use super::{apply_rules, AgentBackend, BackendError, BackendMode, Phase, PhaseOutput, PhaseRequest};
use crate::graph::NodeId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        ChatMessage { role: "system".into(), content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatMessage { role: "user".into(), content: content.into() }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatMessage { role: "assistant".into(), content: content.into() }
    }
}

/// Body of a chat-completion call.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub messages: Vec<ChatMessage>,
}

/// Identity of one agent exchange within a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ExchangeKey {
    pub run_key: String,
    pub node: NodeId,
    pub round: usize,
    pub phase: Phase,
    pub attempt: usize,
}

impl ExchangeKey {
    /// Content address used as the transcript file name.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(format!("{}|{}|{}|{}|{}", self.run_key, self.node, self.round, self.phase, self.attempt));
        hex::encode(h.finalize())
    }
}

impl std::fmt::Display for ExchangeKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "run {} node {} round {} {} attempt {}",
            self.run_key, self.node, self.round, self.phase, self.attempt
        )
    }
}

/// Something that turns a chat request into reply text.
pub trait ChatTransport: Send + Sync {
    fn complete(
        &self,
        key: &ExchangeKey,
        request: &ChatRequest,
        context: &PhaseRequest<'_>,
    ) -> Result<String, BackendError>;
}

/// Chat-completion over HTTP with a bearer credential.
pub struct HttpTransport {
    url: String,
    api_key: Option<String>,
    agent: ureq::Agent,
}

impl HttpTransport {
    pub fn new(endpoint: impl Into<String>, api_key: Option<String>) -> Self {
        let endpoint = endpoint.into();
        let url = format!("{}/chat/completions", endpoint.trim_end_matches('/'));
        let agent = ureq::AgentBuilder::new().timeout(Duration::from_secs(120)).build();
        HttpTransport { url, api_key, agent }
    }

    pub fn url(&self) -> &str {
        &self.url
    }
}

impl std::fmt::Debug for HttpTransport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        // never print the credential
        f.debug_struct("HttpTransport").field("url", &self.url).finish_non_exhaustive()
    }
}

/// Pulls the first choice's text out of a chat-completion response body.
pub(crate) fn extract_content(body: &serde_json::Value) -> Result<String, BackendError> {
    body.pointer("/choices/0/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| BackendError::Endpoint("response has no choices[0].message.content".into()))
}

impl ChatTransport for HttpTransport {
    fn complete(
        &self,
        key: &ExchangeKey,
        request: &ChatRequest,
        _context: &PhaseRequest<'_>,
    ) -> Result<String, BackendError> {
        log::debug!("POST {} for {key}", self.url);
        let mut call = self.agent.post(&self.url).set("Content-Type", "application/json");
        if let Some(k) = &self.api_key {
            call = call.set("Authorization", &format!("Bearer {k}"));
        }
        let resp = call.send_json(request).map_err(|e| match e {
            ureq::Error::Status(code, r) => {
                let body = r.into_string().unwrap_or_default();
                BackendError::Endpoint(format!("HTTP {code}: {}", body.chars().take(300).collect::<String>()))
            }
            other => BackendError::Endpoint(other.to_string()),
        })?;
        let body: serde_json::Value = resp.into_json().map_err(|e| BackendError::Endpoint(e.to_string()))?;
        extract_content(&body)
    }
}

/// Answers every prompt with the reply a perfectly obedient agent would give.
/// Useful for exercising the prompt/parse path and for seeding transcripts.
#[derive(Debug, Clone, Copy, Default)]
pub struct RuleEchoTransport;

impl ChatTransport for RuleEchoTransport {
    fn complete(
        &self,
        _key: &ExchangeKey,
        _request: &ChatRequest,
        context: &PhaseRequest<'_>,
    ) -> Result<String, BackendError> {
        let out = apply_rules(context)?;
        Ok(render_reply(context.phase, context.program, &out))
    }
}

/// Serves recorded replies; any prompt that differs from the recording is a miss.
#[derive(Debug)]
pub struct ReplayTransport {
    store: Arc<TranscriptStore>,
}

impl ReplayTransport {
    pub fn new(store: Arc<TranscriptStore>) -> Self {
        ReplayTransport { store }
    }
}

impl ChatTransport for ReplayTransport {
    fn complete(
        &self,
        key: &ExchangeKey,
        request: &ChatRequest,
        _context: &PhaseRequest<'_>,
    ) -> Result<String, BackendError> {
        let exchange = self.store.lookup(key)?.ok_or_else(|| BackendError::ReplayMiss(key.to_string()))?;
        if exchange.request != *request {
            return Err(BackendError::ReplayMiss(format!("{key}: prompt differs from the recording")));
        }
        Ok(exchange.reply)
    }
}

/// Executes phases by prompting a chat model.
pub struct LlmBackend {
    transport: Box<dyn ChatTransport>,
    model: String,
    temperature: f64,
    max_retries: usize,
    concurrency: Option<usize>,
    recorder: Option<Arc<TranscriptStore>>,
    mode: BackendMode,
}

impl LlmBackend {
    pub fn new(transport: Box<dyn ChatTransport>, model: impl Into<String>) -> Self {
        LlmBackend {
            transport,
            model: model.into(),
            temperature: 0.0,
            max_retries: 2,
            concurrency: None,
            recorder: None,
            mode: BackendMode::Llm,
        }
    }

    pub fn with_temperature(mut self, t: f64) -> Self {
        self.temperature = t;
        self
    }

    pub fn with_max_retries(mut self, n: usize) -> Self {
        self.max_retries = n;
        self
    }

    pub fn with_concurrency(mut self, n: usize) -> Self {
        self.concurrency = Some(n.max(1));
        self
    }

    /// Persist every exchange to `store`.
    pub fn recording_to(mut self, store: Arc<TranscriptStore>) -> Self {
        self.recorder = Some(store);
        self
    }

    /// Marks the backend as serving recorded exchanges.
    pub fn into_replay(mut self) -> Self {
        self.mode = BackendMode::Replay;
        self
    }

    pub fn model(&self) -> &str {
        &self.model
    }
}

impl AgentBackend for LlmBackend {
    fn mode(&self) -> BackendMode {
        self.mode
    }

    fn max_concurrency(&self) -> Option<usize> {
        self.concurrency
    }

    fn execute_phase(&self, req: &PhaseRequest<'_>) -> Result<PhaseOutput, BackendError> {
        let mut messages =
            vec![ChatMessage::system(system_prompt(req.program)), ChatMessage::user(render_phase_prompt(req))];
        let mut last_error = String::new();
        for attempt in 0..=self.max_retries {
            let key = ExchangeKey {
                run_key: req.run_key.to_string(),
                node: req.agent.id,
                round: req.agent.round,
                phase: req.phase,
                attempt,
            };
            let request =
                ChatRequest { model: self.model.clone(), temperature: self.temperature, messages: messages.clone() };
            let reply = self.transport.complete(&key, &request, req)?;
            if let Some(store) = &self.recorder {
                store.record(&key, &request, &reply)?;
            }
            match parse_reply(req, &reply) {
                Ok(out) => return Ok(out),
                Err(e) => {
                    log::warn!("unusable reply for {key}: {e}");
                    messages.push(ChatMessage::assistant(reply.clone()));
                    messages.push(ChatMessage::user(correction_prompt(req, &reply, &e)));
                    last_error = e;
                }
            }
        }
        Err(BackendError::ParseFailure { attempts: self.max_retries + 1, detail: last_error })
    }
}
