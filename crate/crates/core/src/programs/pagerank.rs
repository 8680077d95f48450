use super::{broadcast, steps, AgentView, Outgoing, RuleError, StateTable, Template, VertexProgram};
use crate::runtime::Envelope;
use crate::value::{FieldSpec, Record, Schema, Value, ValueKind, VertexState};

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_EPSILON: f64 = 1e-6;
pub const DEFAULT_MAX_ITERATIONS: usize = 100;

/// Power iteration with uniform redistribution of dangling mass.
///
/// The rank held by nodes without out-edges is summed at each barrier and
/// published as the global aggregate; every node adds its `1/N` share of it.
#[derive(Debug, Clone)]
pub struct PageRank {
    damping: f64,
    epsilon: f64,
    max_iterations: usize,
    state: Schema,
    message: Schema,
}

impl Default for PageRank {
    fn default() -> Self {
        Self::new(DEFAULT_DAMPING, DEFAULT_EPSILON)
    }
}

impl PageRank {
    pub fn new(damping: f64, epsilon: f64) -> Self {
        PageRank {
            damping,
            epsilon,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            state: Schema::new(vec![
                FieldSpec { name: "rank", kind: ValueKind::Number, doc: "Current PageRank value." },
                FieldSpec {
                    name: "delta",
                    kind: ValueKind::Number,
                    doc: "Absolute change of `rank` in the last update.",
                },
                FieldSpec { name: "out_degree", kind: ValueKind::Int, doc: "Number of out-neighbors." },
            ]),
            message: Schema::new(vec![FieldSpec {
                name: "share",
                kind: ValueKind::Number,
                doc: "The sender's rank divided by its out-degree.",
            }]),
        }
    }

    pub fn with_max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

impl VertexProgram for PageRank {
    fn name(&self) -> &'static str {
        "pagerank"
    }

    fn params(&self) -> Record {
        Record::new()
            .with("damping", Value::Float(self.damping))
            .with("epsilon", Value::Float(self.epsilon))
            .with("max_iterations", Value::Int(self.max_iterations as i64))
    }

    fn state_schema(&self) -> &Schema {
        &self.state
    }

    fn message_schema(&self) -> &Schema {
        &self.message
    }

    fn default_max_supersteps(&self, _node_count: usize) -> usize {
        self.max_iterations
    }

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        Ok(Record::new()
            .with("rank", Value::Float(1.0 / agent.node_count as f64))
            .with("delta", Value::Float(0.0))
            .with("out_degree", Value::Int(agent.neighbors.len() as i64)))
    }

    fn send(&self, agent: &AgentView<'_>, state: &VertexState) -> Result<Outgoing, RuleError> {
        let deg = state.int("out_degree")?;
        if deg == 0 {
            return Ok(Vec::new());
        }
        let share = state.float("rank")? / deg as f64;
        Ok(broadcast(agent, Record::new().with("share", Value::Float(share))))
    }

    fn update(&self, agent: &AgentView<'_>, state: &VertexState, inbox: &[Envelope]) -> Result<VertexState, RuleError> {
        let n = agent.node_count as f64;
        let mut incoming = 0.0;
        for m in inbox {
            incoming += m.payload.float("share")?;
        }
        let dangling = match agent.aggregate {
            Some(v) => {
                v.as_number().map(|x| x.as_f64()).ok_or_else(|| RuleError::Invalid(format!("bad aggregate {v}")))?
            }
            None => 0.0,
        };
        let old = state.float("rank")?;
        let rank = (1.0 - self.damping) / n + self.damping * (incoming + dangling / n);
        Ok(Record::new()
            .with("rank", Value::Float(rank))
            .with("delta", Value::Float((rank - old).abs()))
            .with("out_degree", Value::Int(state.int("out_degree")?)))
    }

    fn terminated(&self, states: StateTable<'_>, round: usize) -> bool {
        round >= 1 && states.iter().all(|(_, s)| s.float("delta").map(|d| d < self.epsilon).unwrap_or(false))
    }

    /// Total rank held by dangling nodes.
    fn aggregate(&self, states: StateTable<'_>) -> Option<Value> {
        let mass: f64 = states
            .iter()
            .filter(|(_, s)| s.int("out_degree").map(|d| d == 0).unwrap_or(false))
            .map(|(_, s)| s.float("rank").unwrap_or(0.0))
            .sum();
        Some(Value::Float(mass))
    }

    fn template(&self) -> Template {
        Template {
            name: "PageRank",
            summary: "Compute the importance of every node from the link structure (e.g. web pages and links).",
            state: self.state.clone(),
            message: self.message.clone(),
            initialization: steps(&[
                "Set `rank = 1 / N` where N is the total number of nodes.",
                "Set `delta = 0` and `out_degree` to the number of out-neighbors.",
            ]),
            send: steps(&[
                "If `out_degree` is 0, send nothing; the Global Value carries this node's rank to everyone.",
                "Otherwise send `share = rank / out_degree` to every out-neighbor.",
            ]),
            update: steps(&[
                "Add up the `share` values of all received messages.",
                "Compute `new_rank = (1 - d) / N + d * (sum of shares + Global Value / N)` with damping d, where Global Value is the total rank of nodes without out-neighbors.",
                "Set `delta = |new_rank - rank|` and `rank = new_rank`.",
            ]),
            termination: vec![
                "Stop when every node has `delta` below epsilon, or after the maximum number of iterations.".into(),
                "Rank nodes by `rank`, highest first.".into(),
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
        let g = parse_graph("The graph has 3 nodes, and the edges are: (0->1) (0->2) (1->2)", true, false).unwrap();
        let p = PageRank::default();
        let fx = Fixture::from_graph(&g, 0);
        let s0 = p.init(&fx.view(&g, 0, 0)).unwrap();
        assert_eq!(s0.float("rank"), Ok(1.0 / 3.0));
        assert_eq!(s0.int("out_degree"), Ok(2));
        let out = p.send(&fx.view(&g, 0, 0), &s0).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].1.float("share"), Ok(1.0 / 6.0));

        let fx2 = Fixture::from_graph(&g, 2);
        let s2 = p.init(&fx2.view(&g, 2, 0)).unwrap();
        assert!(p.send(&fx2.view(&g, 2, 0), &s2).unwrap().is_empty());
        let agg = Value::Float(1.0 / 3.0);
        let mut view = fx2.view(&g, 2, 1);
        view.aggregate = Some(&agg);
        let share = |x: f64| Record::new().with("share", Value::Float(x));
        let inbox = [envelope(0, 2, 0, share(1.0 / 6.0)), envelope(1, 2, 0, share(1.0 / 3.0))];
        let s = p.update(&view, &s2, &inbox).unwrap();
        let expect = 0.15 / 3.0 + 0.85 * (0.5 + 1.0 / 9.0);
        assert!((s.float("rank").unwrap() - expect).abs() < 1e-15);
        assert!((s.float("delta").unwrap() - (expect - 1.0 / 3.0).abs()).abs() < 1e-15);
    }

    #[test]
    fn aggregate_sums_dangling_rank() {
        let p = PageRank::default();
        let a = Record::new()
            .with("rank", Value::Float(0.25))
            .with("delta", Value::Float(0.0))
            .with("out_degree", Value::Int(0));
        let b = Record::new()
            .with("rank", Value::Float(0.75))
            .with("delta", Value::Float(0.0))
            .with("out_degree", Value::Int(1));
        let states = vec![a, b];
        let ids = [0, 1];
        assert_eq!(p.aggregate(StateTable::new(&ids, &states)), Some(Value::Float(0.25)));
        assert!(!p.terminated(StateTable::new(&ids, &states), 0));
        assert!(p.terminated(StateTable::new(&ids, &states), 1));
    }
}
