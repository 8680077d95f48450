use super::{broadcast, steps, AgentView, Outgoing, RuleError, Template, VertexProgram};
use crate::runtime::Envelope;
use crate::value::{FieldSpec, Record, Schema, Value, ValueKind, VertexState};

/// Bipartiteness by two-coloring from the smallest id of each component.
///
/// Every node starts as its own root with color 0. A node adopts the smallest
/// root it hears about together with the opposite of the sender's color, so
/// the final colors are breadth-first parities from each component's
/// minimum node. A node flags a conflict when a neighbor with the same root
/// reports the same color.
#[derive(Debug, Clone)]
pub struct Bipartite {
    state: Schema,
    message: Schema,
}

impl Default for Bipartite {
    fn default() -> Self {
        Self::new()
    }
}

impl Bipartite {
    pub fn new() -> Self {
        Bipartite {
            state: Schema::new(vec![
                FieldSpec { name: "root", kind: ValueKind::Node, doc: "Smallest node id known in this component." },
                FieldSpec {
                    name: "color",
                    kind: ValueKind::Int,
                    doc: "0 or 1, the parity of the distance from `root`.",
                },
                FieldSpec {
                    name: "conflict",
                    kind: ValueKind::Bool,
                    doc: "Whether a neighbor in the same component has the same color.",
                },
            ]),
            message: Schema::new(vec![
                FieldSpec { name: "root", kind: ValueKind::Node, doc: "The sender's root." },
                FieldSpec { name: "color", kind: ValueKind::Int, doc: "The sender's color." },
            ]),
        }
    }

    /// True when no node reports a conflict.
    pub fn is_bipartite<'a>(states: impl IntoIterator<Item = &'a VertexState>) -> Result<bool, RuleError> {
        for s in states {
            if s.boolean("conflict")? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl VertexProgram for Bipartite {
    fn name(&self) -> &'static str {
        "bipartite"
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

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        Ok(Record::new().with("root", Value::Node(agent.id)).with("color", Value::Int(0)).with("conflict", false))
    }

    fn send(&self, agent: &AgentView<'_>, state: &VertexState) -> Result<Outgoing, RuleError> {
        let payload =
            Record::new().with("root", Value::Node(state.node("root")?)).with("color", Value::Int(state.int("color")?));
        Ok(broadcast(agent, payload))
    }

    fn update(
        &self,
        _agent: &AgentView<'_>,
        state: &VertexState,
        inbox: &[Envelope],
    ) -> Result<VertexState, RuleError> {
        if inbox.is_empty() {
            return Ok(state.clone());
        }
        let mut root = state.node("root")?;
        let mut color = state.int("color")?;
        for m in inbox {
            let r = m.payload.node("root")?;
            if r < root {
                root = r;
                color = 1 - m.payload.int("color")?;
            }
        }
        let mut conflict = false;
        for m in inbox {
            if m.payload.node("root")? == root && m.payload.int("color")? == color {
                conflict = true;
            }
        }
        Ok(Record::new().with("root", Value::Node(root)).with("color", Value::Int(color)).with("conflict", conflict))
    }

    fn template(&self) -> Template {
        Template {
            name: "Bipartite Graph Check",
            summary: "Decide whether the nodes can be split into two sets with every edge crossing between them.",
            state: self.state.clone(),
            message: self.message.clone(),
            initialization: steps(&["Set `root` to Node Id, `color = 0` and `conflict = False`."]),
            send: steps(&["Send the current `root` and `color` to every neighbor."]),
            update: steps(&[
                "If no messages arrived, keep the state.",
                "Go through the messages in order. Whenever a message carries a `root` smaller than the current `root`, set `root` to it and `color` to 1 minus the message's `color`.",
                "Set `conflict = True` if some message has the same `root` and the same `color` as the node now has; otherwise set `conflict = False`.",
            ]),
            termination: vec![
                "Stop when no node's state changes in a round.".into(),
                "The graph is bipartite if no node has `conflict = True`.".into(),
            ],
        }
    }
}
