use super::{require_node, steps, AgentView, Outgoing, ProgramError, RuleError, Template, VertexProgram};
use crate::graph::{Graph, NodeId};
use crate::number::Number;
use crate::runtime::Envelope;
use crate::value::{distance_lt, distance_plus, FieldSpec, Record, Schema, Value, ValueKind, VertexState};

/// Single-source shortest distances by distributed relaxation.
#[derive(Debug, Clone)]
pub struct ShortestPath {
    source: NodeId,
    state: Schema,
    message: Schema,
}

impl ShortestPath {
    pub fn new(source: NodeId) -> Self {
        ShortestPath {
            source,
            state: Schema::new(vec![FieldSpec {
                name: "distance",
                kind: ValueKind::Distance,
                doc: "Shortest distance from the source found so far (\\infinity if none).",
            }]),
            message: Schema::new(vec![FieldSpec {
                name: "new_distance",
                kind: ValueKind::Distance,
                doc: "The sender's distance plus the weight of the connecting edge.",
            }]),
        }
    }

    pub fn source(&self) -> NodeId {
        self.source
    }
}

impl VertexProgram for ShortestPath {
    fn name(&self) -> &'static str {
        "shortest_path"
    }

    fn params(&self) -> Record {
        Record::new().with("source", Value::Node(self.source))
    }

    fn state_schema(&self) -> &Schema {
        &self.state
    }

    fn message_schema(&self) -> &Schema {
        &self.message
    }

    fn validate(&self, graph: &Graph) -> Result<(), ProgramError> {
        require_node(graph, self.source)?;
        match graph.edges().iter().find(|e| e.weight.is_some_and(Number::is_negative)) {
            Some(e) => Err(ProgramError::NegativeWeight { src: e.src, dst: e.dst }),
            None => Ok(()),
        }
    }

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        let d = if agent.id == self.source { Value::Int(0) } else { Value::Unreachable };
        Ok(Record::new().with("distance", d))
    }

    fn send(&self, agent: &AgentView<'_>, state: &VertexState) -> Result<Outgoing, RuleError> {
        let d = state.value("distance")?;
        Ok(agent
            .neighbors
            .iter()
            .map(|n| {
                let w = n.weight.unwrap_or(Number::Int(1));
                (n.id, Record::new().with("new_distance", distance_plus(d, w)))
            })
            .collect())
    }

    fn update(
        &self,
        _agent: &AgentView<'_>,
        state: &VertexState,
        inbox: &[Envelope],
    ) -> Result<VertexState, RuleError> {
        let mut best = state.value("distance")?.clone();
        for m in inbox {
            let d = m.payload.value("new_distance")?;
            if distance_lt(d, &best) {
                best = d.clone();
            }
        }
        Ok(Record::new().with("distance", best))
    }

    fn template(&self) -> Template {
        Template {
            name: "Shortest Path",
            summary: "Find the shortest distance from a source node to every other node in a weighted graph.",
            state: self.state.clone(),
            message: self.message.clone(),
            initialization: steps(&[
                "If Node Id is the source node, set `distance = 0`.",
                "Otherwise set `distance = \\infinity`.",
            ]),
            send: steps(&[
                "For each neighbor, compute `new_distance = distance + edge weight` (\\infinity stays \\infinity).",
                "Send `new_distance` to that neighbor.",
            ]),
            update: steps(&[
                "Take the smallest `new_distance` among the received messages.",
                "If it is smaller than the current `distance`, replace `distance` with it; otherwise keep `distance`.",
            ]),
            termination: vec!["Stop when no node's `distance` changes in a round.".into()],
        }
    }
}
