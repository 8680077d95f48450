//! The distributed algorithm library.
//!
//! Every task is expressed as a [`VertexProgram`]: a state schema, a message
//! schema, and the Initialization / Send / Update / Termination rules that
//! each agent applies to its own state and inbox.

use std::fmt;

use crate::graph::{Graph, Neighbor, NodeId};
use crate::number::Number;
use crate::runtime::Envelope;
use crate::value::{FieldError, Payload, Record, Schema, Value, VertexState};

mod bipartite;
mod connectivity;
mod cycle;
mod hamilton;
mod max_flow;
mod pagerank;
mod shortest_path;
mod topo_sort;
mod triangle;

pub use bipartite::Bipartite;
pub use connectivity::Connectivity;
pub use cycle::CycleDetection;
pub use hamilton::HamiltonHeuristic;
pub use max_flow::{AugmentingPathSearch, FlowOutcome, MaxFlow};
pub use pagerank::{PageRank, DEFAULT_DAMPING, DEFAULT_EPSILON, DEFAULT_MAX_ITERATIONS};
pub use shortest_path::ShortestPath;
pub use topo_sort::TopologicalSort;
pub use triangle::TriangleSum;

/// What an agent knows about itself when a rule runs.
#[derive(Debug, Clone, Copy)]
pub struct AgentView<'a> {
    pub id: NodeId,
    pub node_count: usize,
    pub round: usize,
    pub directed: bool,
    /// Adjacent nodes (out-neighbors when directed), sorted by id.
    pub neighbors: &'a [Neighbor],
    pub in_neighbors: &'a [Neighbor],
    pub has_self_loop: bool,
    pub node_weight: Option<Number>,
    pub feature: Option<&'a str>,
    /// Global value computed at the previous barrier, if the program declares one.
    pub aggregate: Option<&'a Value>,
}

impl AgentView<'_> {
    pub fn is_neighbor(&self, v: NodeId) -> bool {
        self.neighbors.binary_search_by_key(&v, |n| n.id).is_ok()
    }
}

/// Read-only view over every agent's state at a barrier.
#[derive(Debug, Clone, Copy)]
pub struct StateTable<'a> {
    ids: &'a [NodeId],
    states: &'a [VertexState],
}

impl<'a> StateTable<'a> {
    pub fn new(ids: &'a [NodeId], states: &'a [VertexState]) -> Self {
        debug_assert_eq!(ids.len(), states.len());
        StateTable { ids, states }
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, &'a VertexState)> + 'a {
        self.ids.iter().copied().zip(self.states.iter())
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RuleError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProgramError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("edge ({src},{dst}) has negative weight")]
    NegativeWeight { src: NodeId, dst: NodeId },
    #[error("edge ({src},{dst}) has negative capacity")]
    NegativeCapacity { src: NodeId, dst: NodeId },
    #[error("source and sink are the same node ({0})")]
    SourceEqualsSink(NodeId),
    #[error("node {0} has no weight; triangle sums need node weights")]
    MissingNodeWeight(NodeId),
    #[error("{0}")]
    Unsupported(String),
}

pub type Outgoing = Vec<(NodeId, Payload)>;

/// A six-component algorithm executed identically at every node.
///
/// Rules are pure: identical inputs give identical outputs, and they only
/// read or write fields declared in the schemas.
pub trait VertexProgram: Send + Sync {
    fn name(&self) -> &'static str;

    /// Parameters that specialize the template (source node, damping, ...).
    fn params(&self) -> Record {
        Record::new()
    }

    fn state_schema(&self) -> &Schema;

    fn message_schema(&self) -> &Schema;

    /// Run on the graph with edge direction forgotten.
    fn undirected_view(&self) -> bool {
        false
    }

    /// Checks preconditions the program places on the graph.
    fn validate(&self, _graph: &Graph) -> Result<(), ProgramError> {
        Ok(())
    }

    fn default_max_supersteps(&self, node_count: usize) -> usize {
        node_count + 1
    }

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError>;

    fn send(&self, agent: &AgentView<'_>, state: &VertexState) -> Result<Outgoing, RuleError>;

    fn update(&self, agent: &AgentView<'_>, state: &VertexState, inbox: &[Envelope]) -> Result<VertexState, RuleError>;

    /// Task-specific stopping condition, checked by the master between supersteps.
    fn terminated(&self, _states: StateTable<'_>, _round: usize) -> bool {
        false
    }

    /// Optional global aggregate published at each barrier.
    fn aggregate(&self, _states: StateTable<'_>) -> Option<Value> {
        None
    }

    fn template(&self) -> Template;
}

/// The six-section textual form of a program, used as prompt material and
/// as the library listing.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub name: &'static str,
    pub summary: &'static str,
    pub state: Schema,
    pub message: Schema,
    pub initialization: Vec<String>,
    pub send: Vec<String>,
    pub update: Vec<String>,
    pub termination: Vec<String>,
}

fn write_steps(f: &mut fmt::Formatter<'_>, steps: &[String]) -> fmt::Result {
    for (i, s) in steps.iter().enumerate() {
        writeln!(f, "Step {}: {}", i + 1, s)?;
    }
    Ok(())
}

fn write_fields(f: &mut fmt::Formatter<'_>, schema: &Schema) -> fmt::Result {
    for (i, field) in schema.fields().iter().enumerate() {
        writeln!(f, "{}. `{}`: {}", i + 1, field.name, field.doc)?;
    }
    Ok(())
}

impl fmt::Display for Template {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "## {}", self.name)?;
        writeln!(f, "{}", self.summary)?;
        writeln!(f, "### State")?;
        write_fields(f, &self.state)?;
        writeln!(f, "### Message")?;
        write_fields(f, &self.message)?;
        writeln!(f, "### Initialization")?;
        write_steps(f, &self.initialization)?;
        writeln!(f, "### Send")?;
        write_steps(f, &self.send)?;
        writeln!(f, "### Update")?;
        write_steps(f, &self.update)?;
        writeln!(f, "### Termination")?;
        for line in &self.termination {
            writeln!(f, "- {line}")?;
        }
        Ok(())
    }
}

pub(crate) fn steps(lines: &[&str]) -> Vec<String> {
    lines.iter().map(|s| s.to_string()).collect()
}

pub(crate) fn require_node(graph: &Graph, v: NodeId) -> Result<(), ProgramError> {
    if graph.contains(v) {
        Ok(())
    } else {
        Err(ProgramError::UnknownNode(v))
    }
}

/// Sends the same payload to every neighbor.
pub(crate) fn broadcast(agent: &AgentView<'_>, payload: Payload) -> Outgoing {
    agent.neighbors.iter().map(|n| (n.id, payload.clone())).collect()
}
