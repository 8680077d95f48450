//! Master summarization: final states → structured answer plus narrative.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::Serialize;

use super::{OrchestratorError, ProblemSpec, TaskKind};
use crate::graph::NodeId;
use crate::number::Number;
use crate::programs::{
    Bipartite, CycleDetection, FlowOutcome, HamiltonHeuristic, RuleError, TopologicalSort, TriangleSum,
};
use crate::runtime::RunResult;
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AnswerKind {
    Boolean,
    Number,
    Ordering,
    DistanceMap,
    Ranking,
    NoSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum AnswerValue {
    Boolean(bool),
    Number(Number),
    Ordering(Vec<NodeId>),
    /// Distance per node in id order; `None` is unreachable.
    DistanceMap(Vec<(NodeId, Option<Number>)>),
    /// Every node, highest rank first, ties by ascending id.
    Ranking(Vec<(NodeId, f64)>),
    NoSolution,
}

impl AnswerValue {
    pub fn kind(&self) -> AnswerKind {
        match self {
            AnswerValue::Boolean(_) => AnswerKind::Boolean,
            AnswerValue::Number(_) => AnswerKind::Number,
            AnswerValue::Ordering(_) => AnswerKind::Ordering,
            AnswerValue::DistanceMap(_) => AnswerKind::DistanceMap,
            AnswerValue::Ranking(_) => AnswerKind::Ranking,
            AnswerValue::NoSolution => AnswerKind::NoSolution,
        }
    }
}

/// Compact one-line form used in reports: `true`, `14`, `2 0 1`,
/// `0:7 1:0 2:inf`, `3:0.25 1:0.2`, `none`.
impl fmt::Display for AnswerValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn spaced<T>(f: &mut fmt::Formatter<'_>, items: &[T], one: impl Fn(&T) -> String) -> fmt::Result {
            f.write_str(&items.iter().map(one).collect::<Vec<_>>().join(" "))
        }
        match self {
            AnswerValue::Boolean(b) => write!(f, "{b}"),
            AnswerValue::Number(n) => write!(f, "{n}"),
            AnswerValue::Ordering(o) => spaced(f, o, |v| v.to_string()),
            AnswerValue::DistanceMap(m) => {
                spaced(f, m, |(v, d)| format!("{v}:{}", d.map_or_else(|| "inf".to_string(), |x| x.to_string())))
            }
            AnswerValue::Ranking(r) => spaced(f, r, |(v, x)| format!("{v}:{x:.6}")),
            AnswerValue::NoSolution => f.write_str("none"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Answer {
    pub kind: AnswerKind,
    pub value: AnswerValue,
    pub narrative: String,
}

impl Answer {
    fn new(value: AnswerValue, narrative: String) -> Self {
        Answer { kind: value.kind(), value, narrative }
    }
}

fn inconsistent(e: RuleError) -> OrchestratorError {
    OrchestratorError::InconsistentStates(e.to_string())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "Yes"
    } else {
        "No"
    }
}

fn join_nodes(nodes: &[NodeId]) -> String {
    match nodes {
        [] => String::new(),
        [one] => one.to_string(),
        [init @ .., last] => {
            format!("{} and {last}", init.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", "))
        }
    }
}

/// Aggregates final agent states into the task's answer.
pub fn summarize(result: &RunResult, spec: &ProblemSpec) -> Result<Answer, OrchestratorError> {
    let states = &result.final_states;
    let n = states.len();
    let answer = match spec.task {
        TaskKind::Cycle => {
            let c = CycleDetection::has_cycle(states.values()).map_err(inconsistent)?;
            let text = if c { "there is a cycle in this graph" } else { "there is no cycle in this graph" };
            Answer::new(AnswerValue::Boolean(c), format!("{}, {text}.", yes_no(c)))
        }
        TaskKind::Connectivity => {
            let (s, t) = (spec.require("source")?, spec.require("target")?);
            let reached = states
                .get(&t)
                .ok_or_else(|| OrchestratorError::InconsistentStates(format!("no state for node {t}")))?
                .boolean("reached")
                .map_err(|e| inconsistent(e.into()))?;
            let text = if reached { "are connected" } else { "are not connected" };
            Answer::new(AnswerValue::Boolean(reached), format!("{}, node {s} and node {t} {text}.", yes_no(reached)))
        }
        TaskKind::Bipartite => {
            let b = Bipartite::is_bipartite(states.values()).map_err(inconsistent)?;
            let text = if b { "this graph is bipartite" } else { "this graph is not bipartite" };
            Answer::new(AnswerValue::Boolean(b), format!("{}, {text}.", yes_no(b)))
        }
        TaskKind::HamiltonHeuristic => {
            let longest = HamiltonHeuristic::longest(states.values()).map_err(inconsistent)?;
            let found = longest >= n as i64;
            let narrative = if found {
                format!("Yes, there is a Hamiltonian path in this graph: the heuristic reached path length {longest} on {n} nodes.")
            } else {
                format!(
                    "No, the maximum path length found is {longest}, which is less than the total number of nodes ({n}). \
                     This comes from a heuristic that can miss existing paths."
                )
            };
            Answer::new(AnswerValue::Boolean(found), narrative)
        }
        TaskKind::ShortestPath => {
            let source = spec.require("source")?;
            let mut map = Vec::with_capacity(n);
            for (&v, s) in states {
                let d = match s.value("distance").map_err(|e| inconsistent(e.into()))? {
                    Value::Unreachable => None,
                    other => Some(other.as_number().ok_or_else(|| {
                        OrchestratorError::InconsistentStates(format!("node {v} has distance {other}"))
                    })?),
                };
                map.push((v, d));
            }
            let render = |d: &Option<Number>| d.map_or_else(|| "unreachable".to_string(), |x| x.to_string());
            let listing = map.iter().map(|(v, d)| format!("Node {v}: {}", render(d))).collect::<Vec<_>>().join(", ");
            let mut narrative = String::new();
            if let Some(t) = spec.node_param("target") {
                if let Some((_, d)) = map.iter().find(|(v, _)| *v == t) {
                    narrative = format!("The shortest distance from node {source} to node {t} is {}. ", render(d));
                }
            }
            narrative.push_str(&format!("The shortest distances from node {source} are: {listing}."));
            Answer::new(AnswerValue::DistanceMap(map), narrative)
        }
        TaskKind::TopoSort => {
            match TopologicalSort::order(states.iter().map(|(v, s)| (*v, s))).map_err(inconsistent)? {
                Ok(order) => {
                    let narrative = format!(
                        "A topological ordering of the nodes is: [{}].",
                        order.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
                    );
                    Answer::new(AnswerValue::Ordering(order), narrative)
                }
                Err(stuck) => return Err(OrchestratorError::NotADag(stuck)),
            }
        }
        TaskKind::TriangleSum => match TriangleSum::best(states.values()).map_err(inconsistent)? {
            Some(best) => Answer::new(
                AnswerValue::Number(best),
                format!("The maximum sum of weights of a connected triplet of vertices is {best}."),
            ),
            None => {
                Answer::new(AnswerValue::NoSolution, "There is no connected triplet of vertices in this graph.".into())
            }
        },
        TaskKind::PageRank => {
            let mut ranks = Vec::with_capacity(n);
            for (&v, s) in states {
                ranks.push((v, s.float("rank").map_err(|e| inconsistent(e.into()))?));
            }
            ranks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let listing = ranks.iter().map(|(v, r)| format!("Node {v}: {r}")).collect::<Vec<_>>().join(", ");
            let mut narrative = String::new();
            if let Some(k) = spec.top_k() {
                let top: Vec<NodeId> = ranks.iter().take(k).map(|(v, _)| *v).collect();
                narrative = format!("The {} most important nodes are {}. ", top.len(), join_nodes(&top));
            }
            narrative.push_str(&format!("PageRank values: {listing}."));
            Answer::new(AnswerValue::Ranking(ranks), narrative)
        }
        TaskKind::MaxFlow => {
            return Err(OrchestratorError::Unsupported("max flow answers come from summarize_flow".into()))
        }
    };
    Ok(answer)
}

pub fn summarize_flow(outcome: &FlowOutcome, spec: &ProblemSpec) -> Answer {
    let (s, t) = (spec.node_param("source").unwrap_or(0), spec.node_param("sink").unwrap_or(0));
    Answer::new(
        AnswerValue::Number(outcome.value),
        format!("The maximum flow from node {s} to node {t} is {}.", outcome.value),
    )
}

fn node_entry_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"Node (\d+): (unreachable|-?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?)").expect("static regex")
    })
}

fn entries(text: &str) -> Result<Vec<(NodeId, &str)>, String> {
    node_entry_re()
        .captures_iter(text)
        .map(|c| {
            let v = c[1].parse::<NodeId>().map_err(|e| e.to_string())?;
            Ok((v, c.get(2).expect("group").as_str()))
        })
        .collect()
}

/// Recovers the structured value from a narrative produced by [`summarize`].
pub fn parse_narrative(kind: AnswerKind, text: &str) -> Result<AnswerValue, String> {
    let text = text.trim();
    match kind {
        AnswerKind::Boolean => {
            if text.starts_with("Yes") {
                Ok(AnswerValue::Boolean(true))
            } else if text.starts_with("No") {
                Ok(AnswerValue::Boolean(false))
            } else {
                Err(format!("no Yes/No in `{text}`"))
            }
        }
        AnswerKind::Number => {
            let tail = text.strip_suffix('.').unwrap_or(text);
            let (_, num) = tail.rsplit_once(" is ").ok_or_else(|| format!("no value in `{text}`"))?;
            num.parse::<Number>().map(AnswerValue::Number).map_err(|e| e.to_string())
        }
        AnswerKind::Ordering => {
            let open = text.find('[').ok_or("missing `[`")?;
            let close = text.rfind(']').ok_or("missing `]`")?;
            let body = &text[open + 1..close];
            if body.trim().is_empty() {
                return Ok(AnswerValue::Ordering(Vec::new()));
            }
            body.split(',')
                .map(|s| s.trim().parse::<NodeId>().map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()
                .map(AnswerValue::Ordering)
        }
        AnswerKind::DistanceMap => {
            let body = text.rsplit_once(" are: ").map_or(text, |(_, b)| b);
            let map = entries(body)?
                .into_iter()
                .map(|(v, d)| {
                    let d =
                        if d == "unreachable" { None } else { Some(d.parse::<Number>().map_err(|e| e.to_string())?) };
                    Ok((v, d))
                })
                .collect::<Result<_, String>>()?;
            Ok(AnswerValue::DistanceMap(map))
        }
        AnswerKind::Ranking => {
            let body = text.split_once("PageRank values:").map_or(text, |(_, b)| b);
            let ranks = entries(body)?
                .into_iter()
                .map(|(v, r)| Ok((v, r.parse::<f64>().map_err(|e| e.to_string())?)))
                .collect::<Result<_, String>>()?;
            Ok(AnswerValue::Ranking(ranks))
        }
        AnswerKind::NoSolution => Ok(AnswerValue::NoSolution),
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeMap;

    use super::*;
    use crate::runtime::Termination;
    use crate::value::Record;

    fn result(states: Vec<(NodeId, Record)>) -> RunResult {
        RunResult {
            final_states: states.into_iter().collect::<BTreeMap<_, _>>(),
            supersteps_executed: 1,
            termination: Termination::Converged,
            trace: None,
        }
    }

    fn spec(task: TaskKind, params: Record) -> ProblemSpec {
        ProblemSpec { task, graph_text: String::new(), directed: false, weighted: false, params }
    }

    fn round_trips(a: &Answer) {
        assert_eq!(parse_narrative(a.kind, &a.narrative).as_ref(), Ok(&a.value), "{}", a.narrative);
    }

    #[test]
    fn hamilton_negative_with_disclaimer() {
        let rec = |pl: i64| {
            Record::new()
                .with("visited", true)
                .with("path_length", Value::Int(pl))
                .with("max_path_length", Value::Int(pl))
        };
        let r = result((0..6).map(|v| (v, rec(if v == 3 { 5 } else { 2 }))).collect());
        let a = summarize(&r, &spec(TaskKind::HamiltonHeuristic, Record::new())).unwrap();
        assert_eq!(a.value, AnswerValue::Boolean(false));
        assert!(a.narrative.contains("maximum path length found is 5"));
        assert!(a.narrative.contains("heuristic"));
        round_trips(&a);
    }

    #[test]
    fn connectivity_all_reached() {
        let r = result((0..3).map(|v| (v, Record::new().with("reached", true))).collect());
        let p = Record::new().with("source", Value::Node(0)).with("target", Value::Node(2));
        let a = summarize(&r, &spec(TaskKind::Connectivity, p)).unwrap();
        assert_eq!(a.value, AnswerValue::Boolean(true));
        round_trips(&a);
    }

    #[test]
    fn pagerank_ties_by_id_and_top_k() {
        let rank = |x: f64| {
            Record::new()
                .with("rank", Value::Float(x))
                .with("delta", Value::Float(0.0))
                .with("out_degree", Value::Int(3))
        };
        let r = result((0..4).map(|v| (v, rank(0.25))).collect());
        let a = summarize(&r, &spec(TaskKind::PageRank, Record::new().with("top_k", Value::Int(3)))).unwrap();
        assert_eq!(a.value, AnswerValue::Ranking(vec![(0, 0.25), (1, 0.25), (2, 0.25), (3, 0.25)]));
        assert!(a.narrative.starts_with("The 3 most important nodes are 0, 1 and 2."));
        round_trips(&a);
    }

    #[test]
    fn narratives_round_trip() {
        let answers = [
            Answer::new(AnswerValue::Number(Number::Float(2.5)), "The maximum flow from node 0 to node 1 is 2.5.".into()),
            Answer::new(AnswerValue::Ordering(vec![2, 0, 1]), "A topological ordering of the nodes is: [2, 0, 1].".into()),
            Answer::new(
                AnswerValue::DistanceMap(vec![(0, Some(Number::Int(3))), (1, None)]),
                "The shortest distance from node 0 to node 1 is unreachable. The shortest distances from node 0 are: Node 0: 3, Node 1: unreachable.".into(),
            ),
            Answer::new(AnswerValue::Ranking(vec![(1, 0.6), (0, 1e-7)]), "PageRank values: Node 1: 0.6, Node 0: 0.0000001.".into()),
            Answer::new(AnswerValue::NoSolution, "There is no connected triplet of vertices in this graph.".into()),
        ];
        for a in &answers {
            round_trips(a);
        }
    }
}
