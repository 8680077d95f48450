use super::{steps, AgentView, Outgoing, RuleError, Template, VertexProgram};
use crate::runtime::Envelope;
use crate::value::{FieldSpec, Record, Schema, Value, ValueKind, VertexState};

/// Cycle detection by iterative pruning.
///
/// Undirected: nodes of degree at most one leave the graph, repeatedly; what
/// survives is the 2-core, which is non-empty exactly when a cycle exists.
/// Directed: nodes with no remaining in-edges leave instead.
#[derive(Debug, Clone)]
pub struct CycleDetection {
    state: Schema,
    message: Schema,
}

impl Default for CycleDetection {
    fn default() -> Self {
        Self::new()
    }
}

impl CycleDetection {
    pub fn new() -> Self {
        CycleDetection {
            state: Schema::new(vec![
                FieldSpec { name: "active", kind: ValueKind::Bool, doc: "Whether the node is still in the graph." },
                FieldSpec {
                    name: "remaining_degree",
                    kind: ValueKind::Int,
                    doc: "Edges to active nodes (in-edges from active nodes when directed); a self-loop counts twice when undirected.",
                },
                FieldSpec {
                    name: "pruned_at",
                    kind: ValueKind::MaybeInt,
                    doc: "Round in which the node left the graph, or unset.",
                },
            ]),
            message: Schema::new(vec![FieldSpec {
                name: "removed",
                kind: ValueKind::Bool,
                doc: "Always True; the sender has left the graph.",
            }]),
        }
    }

    fn threshold(directed: bool) -> i64 {
        if directed {
            0
        } else {
            1
        }
    }

    /// True when some node survived pruning.
    pub fn has_cycle<'a>(states: impl IntoIterator<Item = &'a VertexState>) -> Result<bool, RuleError> {
        for s in states {
            if s.boolean("active")? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

impl VertexProgram for CycleDetection {
    fn name(&self) -> &'static str {
        "cycle_detection"
    }

    fn state_schema(&self) -> &Schema {
        &self.state
    }

    fn message_schema(&self) -> &Schema {
        &self.message
    }

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        let degree = if agent.directed {
            agent.in_neighbors.len()
        } else {
            agent.neighbors.len() + usize::from(agent.has_self_loop)
        } as i64;
        let pruned = degree <= Self::threshold(agent.directed);
        Ok(Record::new()
            .with("active", !pruned)
            .with("remaining_degree", Value::Int(degree))
            .with("pruned_at", if pruned { Value::Int(0) } else { Value::Unset }))
    }

    fn send(&self, agent: &AgentView<'_>, state: &VertexState) -> Result<Outgoing, RuleError> {
        if state.maybe_int("pruned_at")? != Some(agent.round as i64) {
            return Ok(Vec::new());
        }
        Ok(agent
            .neighbors
            .iter()
            .filter(|n| n.id != agent.id)
            .map(|n| (n.id, Record::new().with("removed", true)))
            .collect())
    }

    fn update(&self, agent: &AgentView<'_>, state: &VertexState, inbox: &[Envelope]) -> Result<VertexState, RuleError> {
        if !state.boolean("active")? {
            return Ok(state.clone());
        }
        let mut degree = state.int("remaining_degree")?;
        for m in inbox {
            if m.payload.boolean("removed")? {
                degree -= 1;
            }
        }
        let pruned = degree <= Self::threshold(agent.directed);
        Ok(Record::new()
            .with("active", !pruned)
            .with("remaining_degree", Value::Int(degree))
            .with("pruned_at", if pruned { Value::Int(agent.round as i64) } else { state.value("pruned_at")?.clone() }))
    }

    fn template(&self) -> Template {
        Template {
            name: "Cycle Detection",
            summary: "Detect whether the graph contains a cycle by repeatedly removing nodes that cannot lie on one.",
            state: self.state.clone(),
            message: self.message.clone(),
            initialization: steps(&[
                "Set `remaining_degree` to the number of neighbors (undirected, a self-loop counts twice) or to the number of incoming edges (directed).",
                "If `remaining_degree` is at most 1 (undirected) or 0 (directed), set `active = False` and `pruned_at = 0`; otherwise set `active = True` and `pruned_at` unset.",
            ]),
            send: steps(&[
                "If `pruned_at` equals the current round, send `removed: True` to every neighbor (out-neighbor when directed).",
                "Otherwise send nothing.",
            ]),
            update: steps(&[
                "If `active` is False, keep the state.",
                "Subtract the number of received `removed` messages from `remaining_degree`.",
                "If `remaining_degree` is now at most 1 (undirected) or 0 (directed), set `active = False` and `pruned_at` to the current round.",
            ]),
            termination: vec![
                "Stop when no node's state changes in a round.".into(),
                "The graph has a cycle if any node is still active.".into(),
            ],
        }
    }
}
