use super::{broadcast, require_node, steps, AgentView, Outgoing, ProgramError, RuleError, Template, VertexProgram};
use crate::graph::{Graph, NodeId};
use crate::runtime::Envelope;
use crate::value::{FieldSpec, Record, Schema, Value, ValueKind, VertexState};

/// Flood from `source`; the answer is whether `target` gets reached.
#[derive(Debug, Clone)]
pub struct Connectivity {
    source: NodeId,
    target: NodeId,
    state: Schema,
    message: Schema,
}

impl Connectivity {
    pub fn new(source: NodeId, target: NodeId) -> Self {
        Connectivity {
            source,
            target,
            state: Schema::new(vec![FieldSpec {
                name: "reached",
                kind: ValueKind::Bool,
                doc: "Whether a path from the source to this node has been found.",
            }]),
            message: Schema::new(vec![FieldSpec {
                name: "reached",
                kind: ValueKind::Bool,
                doc: "Always True; the sender has been reached.",
            }]),
        }
    }

    pub fn source(&self) -> NodeId {
        self.source
    }

    pub fn target(&self) -> NodeId {
        self.target
    }
}

impl VertexProgram for Connectivity {
    fn name(&self) -> &'static str {
        "connectivity"
    }

    fn params(&self) -> Record {
        Record::new().with("source", Value::Node(self.source)).with("target", Value::Node(self.target))
    }

    fn state_schema(&self) -> &Schema {
        &self.state
    }

    fn message_schema(&self) -> &Schema {
        &self.message
    }

    fn validate(&self, graph: &Graph) -> Result<(), ProgramError> {
        require_node(graph, self.source)?;
        require_node(graph, self.target)
    }

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        Ok(Record::new().with("reached", agent.id == self.source))
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
        let mut reached = state.boolean("reached")?;
        for m in inbox {
            reached |= m.payload.boolean("reached")?;
        }
        Ok(Record::new().with("reached", reached))
    }

    fn template(&self) -> Template {
        Template {
            name: "Connectivity",
            summary: "Decide whether two nodes are connected by a path, by flooding from the first node.",
            state: self.state.clone(),
            message: self.message.clone(),
            initialization: steps(&[
                "If Node Id is the source node, set `reached = True`.",
                "Otherwise set `reached = False`.",
            ]),
            send: steps(&["If `reached` is True, send `reached: True` to every neighbor.", "Otherwise send nothing."]),
            update: steps(&[
                "If any received message has `reached: True`, set `reached = True`.",
                "Otherwise keep the current `reached`.",
            ]),
            termination: vec![
                "Stop when no node's `reached` changes in a round.".into(),
                "The two nodes are connected if the target node has `reached = True`.".into(),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;
    use crate::programs::testing::{envelope, Fixture};

    #[test]
    fn rules_phase_by_phase() {
        let g = parse_graph("The graph has 3 nodes, and the edges are: (0,1) (1,2)", false, false).unwrap();
        let p = Connectivity::new(0, 2);
        let fx0 = Fixture::from_graph(&g, 0);
        let fx1 = Fixture::from_graph(&g, 1);
        let s0 = p.init(&fx0.view(&g, 0, 0)).unwrap();
        let s1 = p.init(&fx1.view(&g, 1, 0)).unwrap();
        assert_eq!(s0.boolean("reached"), Ok(true));
        assert_eq!(s1.boolean("reached"), Ok(false));
        assert_eq!(p.send(&fx0.view(&g, 0, 0), &s0).unwrap(), vec![(1, Record::new().with("reached", true))]);
        assert!(p.send(&fx1.view(&g, 1, 0), &s1).unwrap().is_empty());
        let inbox = [envelope(0, 1, 0, Record::new().with("reached", true))];
        assert_eq!(p.update(&fx1.view(&g, 1, 1), &s1, &inbox).unwrap().boolean("reached"), Ok(true));
        assert_eq!(p.update(&fx1.view(&g, 1, 1), &s1, &[]).unwrap(), s1);
    }

    #[test]
    fn unknown_endpoint_rejected() {
        let g = parse_graph("The graph has 2 nodes, and the edges are: (0,1)", false, false).unwrap();
        assert_eq!(Connectivity::new(0, 9).validate(&g), Err(ProgramError::UnknownNode(9)));
    }
}
