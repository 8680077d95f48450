//! Per-agent executors.
//!
//! The deterministic backend applies a program's rules directly and is the
//! reference semantics. The LLM backend renders each phase as a prompt, sends
//! it to a chat-completion endpoint, and parses the reply; replay serves
//! previously recorded exchanges without touching the network.

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::graph::NodeId;
use crate::programs::{AgentView, RuleError, VertexProgram};
use crate::runtime::Envelope;
use crate::value::{Payload, VertexState};

mod llm;
pub mod prompt;
mod transcript;

pub use llm::{
    ChatMessage, ChatRequest, ChatTransport, ExchangeKey, HttpTransport, LlmBackend, ReplayTransport, RuleEchoTransport,
};
pub use transcript::{Exchange, TranscriptStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    Init,
    Update,
    Send,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Init => "Init",
            Phase::Update => "Update",
            Phase::Send => "Send",
        })
    }
}

/// Everything one agent needs to execute one phase.
pub struct PhaseRequest<'a> {
    pub run_key: &'a str,
    pub phase: Phase,
    pub program: &'a dyn VertexProgram,
    pub agent: &'a AgentView<'a>,
    /// Current state; `None` during Init.
    pub state: Option<&'a VertexState>,
    pub inbox: &'a [Envelope],
}

#[derive(Debug, Clone, PartialEq)]
pub enum PhaseOutput {
    State(VertexState),
    Messages(Vec<(NodeId, Payload)>),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum BackendError {
    #[error("rule failed: {0}")]
    Rule(#[from] RuleError),
    #[error("could not parse agent reply after {attempts} attempt(s): {detail}")]
    ParseFailure { attempts: usize, detail: String },
    #[error("endpoint error: {0}")]
    Endpoint(String),
    #[error("no recorded exchange for {0}")]
    ReplayMiss(String),
    #[error("transcript store corrupt: {0}")]
    StoreCorrupt(String),
    #[error("backend misconfigured: {0}")]
    Config(String),
}

pub trait AgentBackend: Send + Sync {
    fn mode(&self) -> BackendMode;

    fn execute_phase(&self, req: &PhaseRequest<'_>) -> Result<PhaseOutput, BackendError>;

    /// Upper bound on concurrent calls within a superstep; `None` means unbounded.
    fn max_concurrency(&self) -> Option<usize> {
        None
    }
}

/// Applies the program's pure rules.
#[derive(Debug, Clone, Copy, Default)]
pub struct DeterministicBackend;

impl AgentBackend for DeterministicBackend {
    fn mode(&self) -> BackendMode {
        BackendMode::Deterministic
    }

    fn execute_phase(&self, req: &PhaseRequest<'_>) -> Result<PhaseOutput, BackendError> {
        apply_rules(req).map_err(BackendError::from)
    }
}

pub(crate) fn apply_rules(req: &PhaseRequest<'_>) -> Result<PhaseOutput, RuleError> {
    let missing = || RuleError::Invalid(format!("{} phase needs a current state", req.phase));
    Ok(match req.phase {
        Phase::Init => PhaseOutput::State(req.program.init(req.agent)?),
        Phase::Update => {
            let state = req.state.ok_or_else(missing)?;
            PhaseOutput::State(req.program.update(req.agent, state, req.inbox)?)
        }
        Phase::Send => {
            let state = req.state.ok_or_else(missing)?;
            PhaseOutput::Messages(req.program.send(req.agent, state)?)
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum BackendMode {
    #[default]
    Deterministic,
    Llm,
    Replay,
}

impl std::str::FromStr for BackendMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "deterministic" | "rules" => Ok(BackendMode::Deterministic),
            "llm" => Ok(BackendMode::Llm),
            "replay" => Ok(BackendMode::Replay),
            other => Err(format!("unknown backend mode `{other}`")),
        }
    }
}

pub const DEFAULT_API_KEY_ENV: &str = "AGENTGRAPH_API_KEY";
/// Model requested when none is configured, in both LLM and replay mode.
pub const DEFAULT_MODEL: &str = "gpt-4o-mini";

/// Backend selection and settings.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendConfig {
    pub mode: BackendMode,
    pub endpoint: Option<String>,
    pub model_name: Option<String>,
    pub temperature: f64,
    pub max_retries: usize,
    /// Directory of recorded exchanges (written in LLM mode, read in replay mode).
    pub transcript_store: Option<PathBuf>,
    /// Environment variable holding the bearer credential.
    pub api_key_env: String,
    pub concurrency: usize,
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig {
            mode: BackendMode::Deterministic,
            endpoint: None,
            model_name: None,
            temperature: 0.0,
            max_retries: 2,
            transcript_store: None,
            api_key_env: DEFAULT_API_KEY_ENV.to_string(),
            concurrency: 4,
        }
    }
}

impl BackendConfig {
    pub fn build(&self) -> Result<Box<dyn AgentBackend>, BackendError> {
        match self.mode {
            BackendMode::Deterministic => Ok(Box::new(DeterministicBackend)),
            BackendMode::Llm => {
                let endpoint = self
                    .endpoint
                    .clone()
                    .ok_or_else(|| BackendError::Config("LLM mode requires an endpoint".into()))?;
                let key = std::env::var(&self.api_key_env).map_err(|_| {
                    BackendError::Config(format!("LLM mode requires a credential in ${}", self.api_key_env))
                })?;
                let mut backend = LlmBackend::new(
                    Box::new(HttpTransport::new(endpoint, Some(key))),
                    self.model_name.clone().unwrap_or_else(|| DEFAULT_MODEL.into()),
                )
                .with_temperature(self.temperature)
                .with_max_retries(self.max_retries)
                .with_concurrency(self.concurrency);
                if let Some(dir) = &self.transcript_store {
                    backend = backend.recording_to(Arc::new(TranscriptStore::open(dir)?));
                }
                Ok(Box::new(backend))
            }
            BackendMode::Replay => {
                let dir = self
                    .transcript_store
                    .as_ref()
                    .ok_or_else(|| BackendError::Config("replay mode requires a transcript store".into()))?;
                let store = Arc::new(TranscriptStore::open_existing(dir)?);
                Ok(Box::new(
                    LlmBackend::new(
                        Box::new(ReplayTransport::new(store)),
                        self.model_name.clone().unwrap_or_else(|| DEFAULT_MODEL.into()),
                    )
                    .with_temperature(self.temperature)
                    .with_max_retries(self.max_retries)
                    .into_replay(),
                ))
            }
        }
    }
}
