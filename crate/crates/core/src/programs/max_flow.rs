use std::collections::BTreeMap;

use serde::Serialize;

use super::{
    broadcast, require_node, steps, AgentView, Outgoing, ProgramError, RuleError, StateTable, Template, VertexProgram,
};
use crate::backend::AgentBackend;
use crate::graph::{Edge, Graph, NodeId};
use crate::number::Number;
use crate::runtime::{Engine, EngineConfig, Envelope, RunError};
use crate::value::{FieldSpec, Record, Schema, Value, ValueKind, VertexState};

/// Breadth-first search over a residual graph, recording parent pointers.
///
/// A node takes the smallest-id sender of its first batch of messages as its
/// parent, so the path to the sink uses as few edges as possible.
#[derive(Debug, Clone)]
pub struct AugmentingPathSearch {
    source: NodeId,
    sink: NodeId,
    state: Schema,
    message: Schema,
}

impl AugmentingPathSearch {
    pub fn new(source: NodeId, sink: NodeId) -> Self {
        AugmentingPathSearch {
            source,
            sink,
            state: Schema::new(vec![
                FieldSpec { name: "reached", kind: ValueKind::Bool, doc: "Whether the search has reached this node." },
                FieldSpec {
                    name: "parent",
                    kind: ValueKind::MaybeNode,
                    doc: "Node the search arrived from, or unset.",
                },
            ]),
            message: Schema::new(vec![FieldSpec {
                name: "reached",
                kind: ValueKind::Bool,
                doc: "Always True; the sender has been reached.",
            }]),
        }
    }
}

impl VertexProgram for AugmentingPathSearch {
    fn name(&self) -> &'static str {
        "augmenting_path_search"
    }

    fn params(&self) -> Record {
        Record::new().with("source", Value::Node(self.source)).with("sink", Value::Node(self.sink))
    }

    fn state_schema(&self) -> &Schema {
        &self.state
    }

    fn message_schema(&self) -> &Schema {
        &self.message
    }

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        Ok(Record::new().with("reached", agent.id == self.source).with("parent", Value::Unset))
    }

    fn send(&self, agent: &AgentView<'_>, state: &VertexState) -> Result<Outgoing, RuleError> {
        if state.boolean("reached")? {
            Ok(broadcast(agent, Record::new().with("reached", true)))
        } else {
            Ok(Vec::new())
        }
    }

    fn update(
        &self,
        _agent: &AgentView<'_>,
        state: &VertexState,
        inbox: &[Envelope],
    ) -> Result<VertexState, RuleError> {
        if state.boolean("reached")? {
            return Ok(state.clone());
        }
        let mut parent: Option<NodeId> = None;
        for m in inbox {
            if m.payload.boolean("reached")? {
                parent = Some(parent.map_or(m.sender, |p| p.min(m.sender)));
            }
        }
        Ok(match parent {
            Some(p) => Record::new().with("reached", true).with("parent", Value::Node(p)),
            None => state.clone(),
        })
    }

    fn terminated(&self, states: StateTable<'_>, _round: usize) -> bool {
        states.iter().any(|(v, s)| v == self.sink && s.boolean("reached").unwrap_or(false))
    }

    fn template(&self) -> Template {
        Template {
            name: "Maximum Flow (augmenting path search)",
            summary: "One search round of maximum flow: find a shortest path with spare capacity from the source to the sink. The master then pushes the bottleneck capacity along it, updates the residual graph and repeats until no path is left.",
            state: self.state.clone(),
            message: self.message.clone(),
            initialization: steps(&[
                "If Node Id is the source, set `reached = True`; otherwise `reached = False`.",
                "Leave `parent` unset.",
            ]),
            send: steps(&["If `reached` is True, send `reached: True` to every neighbor in the residual graph."]),
            update: steps(&[
                "If `reached` is already True, keep the state.",
                "Otherwise, if any message arrived, set `reached = True` and `parent` to the smallest sender id.",
            ]),
            termination: vec![
                "Stop as soon as the sink is reached, or when no state changes.".into(),
                "The master follows `parent` from the sink back to the source to obtain the augmenting path.".into(),
            ],
        }
    }
}

/// Result of the master-coordinated augmenting loop.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowOutcome {
    pub value: Number,
    pub augmentations: usize,
    /// Supersteps summed over every search run.
    pub supersteps: usize,
    /// Nodes reachable from the source in the final residual graph (a minimum cut).
    pub source_side: Vec<NodeId>,
}

/// Maximum flow from `source` to `sink` by repeated distributed searches.
#[derive(Debug, Clone, Copy)]
pub struct MaxFlow {
    pub source: NodeId,
    pub sink: NodeId,
}

fn positive(n: Number) -> bool {
    !n.is_zero() && !n.is_negative()
}

impl MaxFlow {
    pub fn new(source: NodeId, sink: NodeId) -> Self {
        MaxFlow { source, sink }
    }

    pub fn validate(&self, graph: &Graph) -> Result<(), ProgramError> {
        require_node(graph, self.source)?;
        require_node(graph, self.sink)?;
        if self.source == self.sink {
            return Err(ProgramError::SourceEqualsSink(self.source));
        }
        match graph.edges().iter().find(|e| e.weight.is_some_and(Number::is_negative)) {
            Some(e) => Err(ProgramError::NegativeCapacity { src: e.src, dst: e.dst }),
            None => Ok(()),
        }
    }

    /// Initial residual capacities. Unweighted edges carry capacity 1;
    /// undirected edges carry their capacity both ways.
    fn capacities(graph: &Graph) -> BTreeMap<(NodeId, NodeId), Number> {
        let mut cap: BTreeMap<(NodeId, NodeId), Number> = BTreeMap::new();
        for e in graph.edges() {
            if e.src == e.dst {
                continue;
            }
            let c = e.weight.unwrap_or(Number::Int(1));
            let back = if graph.is_directed() { Number::zero() } else { c };
            for (key, amount) in [((e.src, e.dst), c), ((e.dst, e.src), back)] {
                let slot = cap.entry(key).or_insert(Number::zero());
                *slot = *slot + amount;
            }
        }
        cap
    }

    fn residual_graph(graph: &Graph, cap: &BTreeMap<(NodeId, NodeId), Number>) -> Graph {
        let edges = cap.iter().filter(|(_, c)| positive(**c)).map(|(&(u, v), &c)| Edge::weighted(u, v, c));
        Graph::new(graph.node_ids().iter().copied(), edges, true, true).expect("residual edges use existing nodes")
    }

    pub fn run(&self, graph: &Graph, backend: &dyn AgentBackend, cfg: &EngineConfig) -> Result<FlowOutcome, RunError> {
        self.validate(graph)?;
        let search = AugmentingPathSearch::new(self.source, self.sink);
        let mut cap = Self::capacities(graph);
        let mut value = Number::zero();
        let mut augmentations = 0;
        let mut supersteps = 0;
        loop {
            let residual = Self::residual_graph(graph, &cap);
            let result = Engine::new(&residual, &search, backend, cfg.clone())?.run()?;
            supersteps += result.supersteps_executed;
            let reached = |v: NodeId| result.final_states[&v].boolean("reached").unwrap_or(false);
            if !reached(self.sink) {
                let source_side = graph.node_ids().iter().copied().filter(|&v| reached(v)).collect();
                return Ok(FlowOutcome { value, augmentations, supersteps, source_side });
            }
            let mut path = Vec::new();
            let mut v = self.sink;
            while v != self.source {
                let p = result.final_states[&v].maybe_node("parent").ok().flatten().ok_or_else(|| {
                    RunError::Program(ProgramError::Unsupported(format!("node {v} reached without a parent")))
                })?;
                path.push((p, v));
                v = p;
                if path.len() > graph.node_count() {
                    return Err(RunError::Program(ProgramError::Unsupported("parent pointers form a loop".into())));
                }
            }
            let bottleneck = path.iter().map(|e| cap[e]).reduce(Number::min).expect("path has at least one edge");
            for &(u, w) in &path {
                cap.insert((u, w), cap[&(u, w)] - bottleneck);
                cap.insert((w, u), cap[&(w, u)] + bottleneck);
            }
            value = value + bottleneck;
            augmentations += 1;
            log::debug!("augmenting path {path:?} carries {bottleneck}");
        }
    }
}
