use serde::Serialize;

use super::{Envelope, Termination};
use crate::graph::NodeId;
use crate::programs::VertexProgram;
use crate::value::VertexState;

/// One superstep as observed at the barrier. Round 0 is initialization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRound {
    pub round: usize,
    /// Messages delivered to Update in this round.
    pub consumed: Vec<Envelope>,
    /// States that changed (every state, for round 0).
    pub updated: Vec<(NodeId, VertexState)>,
    /// Messages produced by Send at the end of this round.
    pub sent: Vec<Envelope>,
    pub changed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Trace {
    pub rounds: Vec<TraceRound>,
}

impl Trace {
    /// Line-oriented log in the style of the agent execution transcripts.
    pub fn render(&self, program: &dyn VertexProgram, termination: Termination) -> String {
        let state_schema = program.state_schema();
        let msg_schema = program.message_schema();
        let mut lines = Vec::new();
        for r in &self.rounds {
            if r.round == 0 {
                lines.push("Initialization:".to_string());
            } else {
                lines.push(format!("Superstep {}:", r.round));
            }
            for (v, s) in &r.updated {
                lines.push(format!("{v}: State: {}", state_schema.render_inline(s)));
            }
            for e in &r.sent {
                lines.push(format!(
                    "Node {} Send Message to Node {}: {}",
                    e.sender,
                    e.recipient,
                    msg_schema.render_inline(&e.payload)
                ));
            }
        }
        lines.push(
            match termination {
                Termination::Converged => "All agents' state unchanged, terminating early...",
                Termination::TerminationRuleMet => "Termination condition met, stopping...",
                Termination::IterationCapReached => "Maximum number of iterations reached, stopping...",
            }
            .to_string(),
        );
        lines.join("\n")
    }
}
