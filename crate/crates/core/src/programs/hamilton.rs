use super::{broadcast, steps, AgentView, Outgoing, RuleError, StateTable, Template, VertexProgram};
use crate::graph::NodeId;
use crate::runtime::Envelope;
use crate::value::{FieldSpec, Record, Schema, Value, ValueKind, VertexState};

/// Path-length propagation heuristic for Hamiltonian paths.
///
/// Not exact: it can miss paths that exist. Answers "Yes" only when some node
/// reaches a path length equal to the node count.
#[derive(Debug, Clone)]
pub struct HamiltonHeuristic {
    start: NodeId,
    state: Schema,
    message: Schema,
}

impl HamiltonHeuristic {
    pub fn new(start: NodeId) -> Self {
        HamiltonHeuristic {
            start,
            state: Schema::new(vec![
                FieldSpec { name: "visited", kind: ValueKind::Bool, doc: "True once a path has reached this node." },
                FieldSpec { name: "path_length", kind: ValueKind::Int, doc: "Length of the path ending at this node." },
                FieldSpec {
                    name: "max_path_length",
                    kind: ValueKind::Int,
                    doc: "Longest path length this node has heard of.",
                },
            ]),
            message: Schema::new(vec![
                FieldSpec { name: "path_length", kind: ValueKind::Int, doc: "Path length offered by the sender." },
                FieldSpec {
                    name: "max_path_length",
                    kind: ValueKind::Int,
                    doc: "Longest path length the sender has heard of.",
                },
                FieldSpec {
                    name: "visited_flag",
                    kind: ValueKind::Bool,
                    doc: "Whether the sender was already visited; such messages are ignored.",
                },
            ]),
        }
    }

    pub fn start(&self) -> NodeId {
        self.start
    }

    /// Largest `path_length` over all nodes.
    pub fn longest<'a>(states: impl IntoIterator<Item = &'a VertexState>) -> Result<i64, RuleError> {
        let mut best = 0;
        for s in states {
            best = best.max(s.int("path_length")?);
        }
        Ok(best)
    }
}

impl VertexProgram for HamiltonHeuristic {
    fn name(&self) -> &'static str {
        "hamilton_heuristic"
    }

    fn params(&self) -> Record {
        Record::new().with("start", Value::Node(self.start))
    }

    fn state_schema(&self) -> &Schema {
        &self.state
    }

    fn message_schema(&self) -> &Schema {
        &self.message
    }

    fn default_max_supersteps(&self, node_count: usize) -> usize {
        node_count.max(1)
    }

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        let is_start = agent.id == self.start;
        Ok(Record::new()
            .with("visited", is_start)
            .with("path_length", Value::Int(i64::from(is_start)))
            .with("max_path_length", Value::Int(1)))
    }

    fn send(&self, agent: &AgentView<'_>, state: &VertexState) -> Result<Outgoing, RuleError> {
        if state.boolean("visited")? {
            return Ok(Vec::new());
        }
        let next = state.int("path_length")? + 1;
        let payload = Record::new()
            .with("path_length", Value::Int(next))
            .with("max_path_length", Value::Int(state.int("max_path_length")?.max(next)))
            .with("visited_flag", false);
        Ok(broadcast(agent, payload))
    }

    fn update(
        &self,
        _agent: &AgentView<'_>,
        state: &VertexState,
        inbox: &[Envelope],
    ) -> Result<VertexState, RuleError> {
        let mut visited = state.boolean("visited")?;
        let mut path_length = state.int("path_length")?;
        let mut max_path_length = state.int("max_path_length")?;
        for m in inbox {
            if m.payload.boolean("visited_flag")? {
                continue;
            }
            visited = true;
            path_length = path_length.max(m.payload.int("path_length")?) + 1;
            max_path_length = max_path_length.max(m.payload.int("max_path_length")?);
        }
        Ok(Record::new()
            .with("visited", visited)
            .with("path_length", Value::Int(path_length))
            .with("max_path_length", Value::Int(max_path_length)))
    }

    fn terminated(&self, states: StateTable<'_>, _round: usize) -> bool {
        let n = states.len() as i64;
        states.iter().any(|(_, s)| s.int("path_length").map(|l| l >= n).unwrap_or(false))
    }

    fn template(&self) -> Template {
        Template {
            name: "Hamilton Path (heuristic)",
            summary: "Heuristically decide whether a path visits every node exactly once. The answer is not guaranteed to be exact.",
            state: self.state.clone(),
            message: self.message.clone(),
            initialization: vec![
                "Every node starts with `visited = False`, `path_length = 0` and `max_path_length = 1`.".into(),
                format!("The start node (Node Id: {}) instead starts with `visited = True` and `path_length = 1`.", self.start),
            ],
            send: steps(&[
                "If `visited` is `False`, construct for every neighbor the message `(path_length + 1, max(max_path_length, path_length + 1), visited_flag = False)`.",
                "Send the constructed messages to the neighbors.",
            ]),
            update: steps(&[
                "Process the received messages in order, skipping any with `visited_flag = True`.",
                "For each processed message set `visited = True`.",
                "Set `path_length = max(path_length, received path_length) + 1`.",
                "Set `max_path_length = max(max_path_length, received max_path_length)`.",
            ]),
            termination: vec![
                "Stop with \"Yes\" as soon as some node has `path_length` equal to the number of nodes.".into(),
                "Otherwise stop after as many rounds as there are nodes, or when nothing changes, and answer \"No\".".into(),
            ],
        }
    }
}
