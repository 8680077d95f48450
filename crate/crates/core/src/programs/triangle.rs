use super::{broadcast, steps, AgentView, Outgoing, ProgramError, RuleError, Template, VertexProgram};
use crate::graph::{Graph, NodeId};
use crate::number::Number;
use crate::runtime::Envelope;
use crate::value::{FieldSpec, Record, Schema, Value, ValueKind, VertexState};

/// Maximum node-weight sum over triangles.
///
/// Round 0: every node sends its weight and neighbor ids. Round 1: each node
/// checks every pair of senders that list each other and records the best
/// sum through itself.
#[derive(Debug, Clone)]
pub struct TriangleSum {
    state: Schema,
    message: Schema,
}

impl Default for TriangleSum {
    fn default() -> Self {
        Self::new()
    }
}

impl TriangleSum {
    pub fn new() -> Self {
        TriangleSum {
            state: Schema::new(vec![
                FieldSpec { name: "weight", kind: ValueKind::Number, doc: "This node's weight." },
                FieldSpec {
                    name: "best_sum",
                    kind: ValueKind::MaybeNumber,
                    doc: "Largest weight sum of a triangle through this node, or unset if none.",
                },
            ]),
            message: Schema::new(vec![
                FieldSpec { name: "weight", kind: ValueKind::Number, doc: "The sender's weight." },
                FieldSpec { name: "neighbors", kind: ValueKind::NodeList, doc: "The sender's neighbor ids." },
            ]),
        }
    }

    /// Global maximum over all nodes, `None` for a triangle-free graph.
    pub fn best<'a>(states: impl IntoIterator<Item = &'a VertexState>) -> Result<Option<Number>, RuleError> {
        let mut best: Option<Number> = None;
        for s in states {
            if let Some(x) = s.maybe_number("best_sum")? {
                best = Some(best.map_or(x, |b| b.max(x)));
            }
        }
        Ok(best)
    }
}

impl VertexProgram for TriangleSum {
    fn name(&self) -> &'static str {
        "triangle_sum"
    }

    fn state_schema(&self) -> &Schema {
        &self.state
    }

    fn message_schema(&self) -> &Schema {
        &self.message
    }

    fn undirected_view(&self) -> bool {
        true
    }

    fn validate(&self, graph: &Graph) -> Result<(), ProgramError> {
        match graph.node_ids().iter().find(|v| graph.node_weight(**v).is_none()) {
            Some(v) => Err(ProgramError::MissingNodeWeight(*v)),
            None => Ok(()),
        }
    }

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        let w = agent.node_weight.ok_or_else(|| RuleError::Invalid(format!("node {} has no weight", agent.id)))?;
        Ok(Record::new().with("weight", w).with("best_sum", Value::Unset))
    }

    fn send(&self, agent: &AgentView<'_>, state: &VertexState) -> Result<Outgoing, RuleError> {
        if agent.round != 0 {
            return Ok(Vec::new());
        }
        let ids: Vec<NodeId> = agent.neighbors.iter().map(|n| n.id).filter(|&u| u != agent.id).collect();
        let payload = Record::new().with("weight", state.number("weight")?).with("neighbors", Value::Nodes(ids));
        Ok(broadcast(agent, payload).into_iter().filter(|(u, _)| *u != agent.id).collect())
    }

    fn update(&self, agent: &AgentView<'_>, state: &VertexState, inbox: &[Envelope]) -> Result<VertexState, RuleError> {
        let own = state.number("weight")?;
        let mut best = state.maybe_number("best_sum")?;
        let msgs: Vec<(NodeId, Number, &[NodeId])> = inbox
            .iter()
            .filter(|m| m.sender != agent.id)
            .map(|m| Ok((m.sender, m.payload.number("weight")?, m.payload.nodes("neighbors")?)))
            .collect::<Result<_, RuleError>>()?;
        for (i, (u, wu, nu)) in msgs.iter().enumerate() {
            for (x, wx, _) in &msgs[i + 1..] {
                if u != x && nu.contains(x) {
                    let sum = own + *wu + *wx;
                    best = Some(best.map_or(sum, |b| b.max(sum)));
                }
            }
        }
        Ok(Record::new().with("weight", own).with("best_sum", best.map(Value::from).unwrap_or(Value::Unset)))
    }

    fn template(&self) -> Template {
        Template {
            name: "Maximum Triangle Sum",
            summary: "Find the maximum sum of node weights over any three mutually connected nodes.",
            state: self.state.clone(),
            message: self.message.clone(),
            initialization: steps(&["Set `weight` to the node's weight and leave `best_sum` unset."]),
            send: steps(&[
                "In round 0 only, send `weight` and the list of neighbor ids to every neighbor.",
                "In later rounds send nothing.",
            ]),
            update: steps(&[
                "For every pair of received messages from nodes u and w where u's neighbor list contains w, compute own weight + weight of u + weight of w.",
                "Set `best_sum` to the largest of these sums and the current `best_sum`.",
            ]),
            termination: vec![
                "Stop when no node's state changes in a round.".into(),
                "The answer is the largest `best_sum` over all nodes; if every `best_sum` is unset there is no triangle.".into(),
            ],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::parse_graph;
    use crate::programs::testing::{envelope, Fixture};

    const TRI: &str = "The nodes are numbered from 0 to 3, weights of nodes are: [0, 1] [1, 2] [2, 3] [3, 9], and the edges are: (0, 1) (1, 2) (0, 2) (2, 3)";

    #[test]
    fn send_lists_neighbors_only_in_round_zero() {
        let g = parse_graph(TRI, false, false).unwrap();
        let p = TriangleSum::new();
        let fx = Fixture::from_graph(&g, 2);
        let s = p.init(&fx.view(&g, 2, 0)).unwrap();
        assert_eq!(s.number("weight"), Ok(Number::Int(3)));
        let out = p.send(&fx.view(&g, 2, 0), &s).unwrap();
        assert_eq!(out.len(), 3);
        assert_eq!(out[0].1.nodes("neighbors"), Ok(&[0, 1, 3][..]));
        assert!(p.send(&fx.view(&g, 2, 1), &s).unwrap().is_empty());
    }

    #[test]
    fn update_finds_triangle_through_self() {
        let g = parse_graph(TRI, false, false).unwrap();
        let p = TriangleSum::new();
        let fx = Fixture::from_graph(&g, 2);
        let s = p.init(&fx.view(&g, 2, 0)).unwrap();
        let m = |w: i64, ns: Vec<u32>| Record::new().with("weight", Value::Int(w)).with("neighbors", Value::Nodes(ns));
        let inbox = [
            envelope(0, 2, 0, m(1, vec![1, 2])),
            envelope(1, 2, 0, m(2, vec![0, 2])),
            envelope(3, 2, 0, m(9, vec![2])),
        ];
        let s2 = p.update(&fx.view(&g, 2, 1), &s, &inbox).unwrap();
        assert_eq!(s2.maybe_number("best_sum"), Ok(Some(Number::Int(6))));
        let fx3 = Fixture::from_graph(&g, 3);
        let s3 = p.init(&fx3.view(&g, 3, 0)).unwrap();
        let s3b = p.update(&fx3.view(&g, 3, 1), &s3, &[envelope(2, 3, 0, m(3, vec![0, 1, 3]))]).unwrap();
        assert_eq!(s3b.maybe_number("best_sum"), Ok(None));
        assert_eq!(p.update(&fx3.view(&g, 3, 1), &s3, &[]).unwrap(), s3);
    }

    #[test]
    fn requires_node_weights() {
        let g = parse_graph("The graph has 3 nodes, and the edges are: (0,1) (1,2) (0,2)", false, false).unwrap();
        assert_eq!(TriangleSum::new().validate(&g), Err(ProgramError::MissingNodeWeight(0)));
    }
}
