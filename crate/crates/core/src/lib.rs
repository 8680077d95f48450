//! Vertex-centric graph reasoning with one agent per node.
//!
//! A problem stated as text is classified, its graph parsed, and a
//! [`programs::VertexProgram`] run by the bulk-synchronous [`runtime::Engine`].
//! Agents execute either the program rules directly or through a chat model
//! ([`backend`]); the [`orchestrator`] turns the final states into an answer
//! and [`eval`] scores answers against sequential oracles.

pub mod backend;
pub mod eval;
pub mod graph;
pub mod number;
pub mod orchestrator;
pub mod programs;
pub mod runtime;
pub mod value;

pub use backend::{AgentBackend, BackendConfig, BackendError, BackendMode, DeterministicBackend};
pub use graph::{parse_graph, Edge, Graph, GraphError, Neighbor, NodeId};
pub use number::{Number, Scalar};
pub use orchestrator::{classify_problem, solve, summarize, Answer, AnswerKind, ProblemSpec, TaskKind};
pub use programs::VertexProgram;
pub use runtime::{run, Engine, EngineConfig, RunError, RunResult, Termination};
pub use value::{Payload, Record, Value, ValueKind, VertexState};

/// Edge weights in the integer-weighted task families.
pub type ExactWeight = i64;
/// Edge weights and flows when the input uses decimals.
pub type RealWeight = f64;
/// PageRank values.
pub type Rank = f64;
