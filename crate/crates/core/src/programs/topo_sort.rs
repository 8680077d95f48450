use super::{broadcast, steps, AgentView, Outgoing, ProgramError, RuleError, Template, VertexProgram};
use crate::graph::{Graph, NodeId};
use crate::runtime::Envelope;
use crate::value::{FieldSpec, Record, Schema, Value, ValueKind, VertexState};

/// Kahn-style layering: a node joins layer `r` in the round its last
/// predecessor leaves, then tells its successors.
#[derive(Debug, Clone)]
pub struct TopologicalSort {
    state: Schema,
    message: Schema,
}

impl Default for TopologicalSort {
    fn default() -> Self {
        Self::new()
    }
}

impl TopologicalSort {
    pub fn new() -> Self {
        TopologicalSort {
            state: Schema::new(vec![
                FieldSpec {
                    name: "remaining_in_degree",
                    kind: ValueKind::Int,
                    doc: "Incoming edges from nodes that have not been placed yet.",
                },
                FieldSpec {
                    name: "layer",
                    kind: ValueKind::MaybeInt,
                    doc: "Round in which the node was placed, or unset.",
                },
            ]),
            message: Schema::new(vec![FieldSpec {
                name: "decrement",
                kind: ValueKind::Int,
                doc: "Always 1; one predecessor has been placed.",
            }]),
        }
    }

    /// Nodes sorted by (layer, id). Any unplaced node means the graph has a cycle;
    /// those nodes are returned as the error.
    pub fn order<'a>(
        states: impl IntoIterator<Item = (NodeId, &'a VertexState)>,
    ) -> Result<Result<Vec<NodeId>, Vec<NodeId>>, RuleError> {
        let mut placed = Vec::new();
        let mut stuck = Vec::new();
        for (v, s) in states {
            match s.maybe_int("layer")? {
                Some(l) => placed.push((l, v)),
                None => stuck.push(v),
            }
        }
        if !stuck.is_empty() {
            return Ok(Err(stuck));
        }
        placed.sort_unstable();
        Ok(Ok(placed.into_iter().map(|(_, v)| v).collect()))
    }
}

impl VertexProgram for TopologicalSort {
    fn name(&self) -> &'static str {
        "topological_sort"
    }

    fn state_schema(&self) -> &Schema {
        &self.state
    }

    fn message_schema(&self) -> &Schema {
        &self.message
    }

    fn validate(&self, graph: &Graph) -> Result<(), ProgramError> {
        if graph.is_directed() {
            Ok(())
        } else {
            Err(ProgramError::Unsupported("topological sort needs a directed graph".into()))
        }
    }

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        let indeg = agent.in_neighbors.len() as i64;
        Ok(Record::new()
            .with("remaining_in_degree", Value::Int(indeg))
            .with("layer", if indeg == 0 { Value::Int(0) } else { Value::Unset }))
    }

    fn send(&self, agent: &AgentView<'_>, state: &VertexState) -> Result<Outgoing, RuleError> {
        if state.maybe_int("layer")? == Some(agent.round as i64) {
            Ok(broadcast(agent, Record::new().with("decrement", Value::Int(1))))
        } else {
            Ok(Vec::new())
        }
    }

    fn update(&self, agent: &AgentView<'_>, state: &VertexState, inbox: &[Envelope]) -> Result<VertexState, RuleError> {
        let mut remaining = state.int("remaining_in_degree")?;
        for m in inbox {
            remaining -= m.payload.int("decrement")?;
        }
        let layer = match state.maybe_int("layer")? {
            Some(l) => Value::Int(l),
            None if remaining <= 0 => Value::Int(agent.round as i64),
            None => Value::Unset,
        };
        Ok(Record::new().with("remaining_in_degree", Value::Int(remaining)).with("layer", layer))
    }

    fn template(&self) -> Template {
        Template {
            name: "Topological Sort",
            summary: "Order the nodes of a directed acyclic graph so every edge points forward.",
            state: self.state.clone(),
            message: self.message.clone(),
            initialization: steps(&[
                "Set `remaining_in_degree` to the number of incoming edges.",
                "If it is 0, set `layer = 0`; otherwise leave `layer` unset.",
            ]),
            send: steps(&[
                "If `layer` equals the current round, send `decrement: 1` to every out-neighbor.",
                "Otherwise send nothing.",
            ]),
            update: steps(&[
                "Subtract the received `decrement` values from `remaining_in_degree`.",
                "If `layer` is unset and `remaining_in_degree` is now 0, set `layer` to the current round.",
            ]),
            termination: vec![
                "Stop when no node's state changes in a round.".into(),
                "Output the nodes sorted by `layer`, ties by node id. A node with unset `layer` means the graph is not acyclic.".into(),
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
        let g = parse_graph("The graph has 3 nodes, and the edges are: (0->2) (1->2)", true, false).unwrap();
        let p = TopologicalSort::new();
        let fx0 = Fixture::from_graph(&g, 0);
        let fx2 = Fixture::from_graph(&g, 2);
        let s0 = p.init(&fx0.view(&g, 0, 0)).unwrap();
        let s2 = p.init(&fx2.view(&g, 2, 0)).unwrap();
        assert_eq!(s0.maybe_int("layer"), Ok(Some(0)));
        assert_eq!(s2.int("remaining_in_degree"), Ok(2));
        assert_eq!(s2.maybe_int("layer"), Ok(None));
        assert_eq!(p.send(&fx0.view(&g, 0, 0), &s0).unwrap().len(), 1);
        assert!(p.send(&fx0.view(&g, 0, 1), &s0).unwrap().is_empty());
        let dec = || Record::new().with("decrement", Value::Int(1));
        let half = p.update(&fx2.view(&g, 2, 1), &s2, &[envelope(0, 2, 0, dec())]).unwrap();
        assert_eq!(half.maybe_int("layer"), Ok(None));
        let done = p.update(&fx2.view(&g, 2, 1), &s2, &[envelope(0, 2, 0, dec()), envelope(1, 2, 0, dec())]).unwrap();
        assert_eq!(done.maybe_int("layer"), Ok(Some(1)));
        assert_eq!(p.update(&fx2.view(&g, 2, 1), &s2, &[]).unwrap(), s2);
    }

    #[test]
    fn order_ties_by_id_and_reports_stuck_nodes() {
        let a = Record::new().with("remaining_in_degree", Value::Int(0)).with("layer", Value::Int(1));
        let b = Record::new().with("remaining_in_degree", Value::Int(0)).with("layer", Value::Int(0));
        let c = Record::new().with("remaining_in_degree", Value::Int(1)).with("layer", Value::Unset);
        assert_eq!(TopologicalSort::order([(2, &a), (1, &b), (0, &b)]).unwrap(), Ok(vec![0, 1, 2]));
        assert_eq!(TopologicalSort::order([(2, &a), (5, &c)]).unwrap(), Err(vec![5]));
    }

    #[test]
    fn undirected_rejected() {
        let g = parse_graph("The graph has 2 nodes, and the edges are: (0,1)", false, false).unwrap();
        assert!(TopologicalSort::new().validate(&g).is_err());
    }
}
