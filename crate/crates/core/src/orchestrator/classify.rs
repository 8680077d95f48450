//! Lexical template retrieval and parameter extraction.

use std::sync::OnceLock;

use regex::Regex;

use super::{OrchestratorError, ProblemSpec, TaskKind};
use crate::backend::prompt::PARADIGM;
use crate::graph::{first_tuple_shape, NodeId};
use crate::value::{Record, Value};

/// Minimum score a template needs before it counts as a match.
pub const DEFAULT_THRESHOLD: f64 = 3.0;
/// Number of templates handed to the composition prompt.
pub const DEFAULT_TOP_K: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifierConfig {
    pub threshold: f64,
    pub top_k: usize,
}

impl Default for ClassifierConfig {
    fn default() -> Self {
        ClassifierConfig { threshold: DEFAULT_THRESHOLD, top_k: DEFAULT_TOP_K }
    }
}

// (phrase, weight); matched against the lowercased text
fn phrases(task: TaskKind) -> &'static [(&'static str, f64)] {
    match task {
        TaskKind::Cycle => &[("cycle", 4.0), ("cyclic", 1.0)],
        TaskKind::Connectivity => &[
            ("connected via a path", 4.0),
            ("is there a path between", 4.0),
            ("connectivity", 4.0),
            ("reachable", 3.0),
            ("connected", 1.0),
        ],
        TaskKind::Bipartite => &[("bipartite", 5.0)],
        TaskKind::TopoSort => &[("topological", 5.0), ("topology sort", 5.0), ("ordering of", 1.0)],
        TaskKind::ShortestPath => &[("shortest", 5.0), ("distance", 1.0)],
        TaskKind::TriangleSum => &[("triangle", 4.0), ("triplet", 3.0), ("maximum sum", 2.0)],
        TaskKind::MaxFlow => &[("maximum flow", 5.0), ("max flow", 5.0), ("max-flow", 5.0), ("sink", 1.0)],
        TaskKind::PageRank => &[
            ("pagerank", 5.0),
            ("page rank", 5.0),
            ("importance", 3.0),
            ("most important", 3.0),
            ("web page", 2.0),
            ("webpage", 2.0),
            ("rank", 1.0),
        ],
        TaskKind::HamiltonHeuristic => &[("hamilton", 6.0)],
    }
}

fn score(task: TaskKind, lower: &str) -> f64 {
    phrases(task).iter().filter(|(p, _)| lower.contains(p)).map(|(_, w)| w).sum()
}

/// Templates ranked by lexical score, best first; ties keep library order.
/// Only positive scores are returned.
pub fn retrieve_templates(text: &str, k: usize) -> Vec<(TaskKind, f64)> {
    let lower = text.to_lowercase();
    let mut scored: Vec<(TaskKind, f64)> =
        TaskKind::ALL.iter().map(|&t| (t, score(t, &lower))).filter(|(_, s)| *s > 0.0).collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1));
    scored.truncate(k);
    scored
}

fn pick_task(text: &str, cfg: &ClassifierConfig) -> Result<TaskKind, OrchestratorError> {
    let ranked = retrieve_templates(text, TaskKind::ALL.len());
    let Some(&(best, top)) = ranked.first() else {
        return Err(OrchestratorError::NoMatchingTemplate);
    };
    if top < cfg.threshold {
        return Err(OrchestratorError::NoMatchingTemplate);
    }
    let tied: Vec<TaskKind> = ranked.iter().filter(|(_, s)| *s == top).map(|(t, _)| *t).collect();
    if tied.len() > 1 {
        return Err(OrchestratorError::AmbiguousTask(tied));
    }
    Ok(best)
}

/// Classifies with the default threshold.
pub fn classify_problem(text: &str) -> Result<ProblemSpec, OrchestratorError> {
    classify_with(text, &ClassifierConfig::default())
}

pub fn classify_with(text: &str, cfg: &ClassifierConfig) -> Result<ProblemSpec, OrchestratorError> {
    let task = pick_task(text, cfg)?;
    classify_as(text, task)
}

/// Builds the problem description for a known task (a hint or an LLM classifier's choice).
pub fn classify_as(text: &str, task: TaskKind) -> Result<ProblemSpec, OrchestratorError> {
    let lower = text.to_lowercase();
    let shape = first_tuple_shape(text);
    let weighted = matches!(shape, Some((n, _)) if n >= 3);
    if task == TaskKind::TriangleSum && weighted {
        return Err(OrchestratorError::Unsupported(
            "triangle sums use node weights; edge-weighted tuples are not accepted".into(),
        ));
    }
    let directed = if lower.contains("undirected") {
        false
    } else if lower.contains("directed") || matches!(shape, Some((_, true))) {
        true
    } else {
        matches!(task, TaskKind::TopoSort | TaskKind::MaxFlow)
    };

    let params = extract_params(&lower, task)?;
    Ok(ProblemSpec { task, graph_text: text.to_string(), directed, weighted, params })
}

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static regex"))
}

fn last_capture(re: &Regex, text: &str) -> Option<Vec<NodeId>> {
    re.captures_iter(text).last().map(|c| c.iter().skip(1).flatten().filter_map(|m| m.as_str().parse().ok()).collect())
}

fn number_word(s: &str) -> Option<i64> {
    let words = ["one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten"];
    s.parse().ok().or_else(|| words.iter().position(|w| *w == s).map(|i| i as i64 + 1))
}

fn extract_params(lower: &str, task: TaskKind) -> Result<Record, OrchestratorError> {
    static BETWEEN: OnceLock<Regex> = OnceLock::new();
    static FROM_TO: OnceLock<Regex> = OnceLock::new();
    static FROM: OnceLock<Regex> = OnceLock::new();
    static PAIR: OnceLock<Regex> = OnceLock::new();
    static SOURCE: OnceLock<Regex> = OnceLock::new();
    static SINK: OnceLock<Regex> = OnceLock::new();
    static TOP: OnceLock<Regex> = OnceLock::new();
    let between = re(&BETWEEN, r"between node (\d+) and node (\d+)");
    let from_to = re(&FROM_TO, r"from node (\d+) to node (\d+)");
    let from = re(&FROM, r"from node (\d+)");
    let pair = re(&PAIR, r"nodes (\d+) and (\d+)");
    let source = re(&SOURCE, r"source node (\d+)");
    let sink = re(&SINK, r"sink node (\d+)");
    let top = re(&TOP, r"(?:top[- ](\d+|[a-z]+)\b|\b(\d+|[a-z]+) most important)");

    let two = last_capture(between, lower)
        .or_else(|| last_capture(from_to, lower))
        .or_else(|| last_capture(pair, lower))
        .filter(|v| v.len() == 2);
    let one = last_capture(source, lower).or_else(|| last_capture(from, lower)).and_then(|v| v.first().copied());
    let sink_node = last_capture(sink, lower).and_then(|v| v.first().copied());

    let mut params = Record::new();
    let missing = |p: &str| OrchestratorError::MissingParameter { task, param: p.to_string() };
    match task {
        TaskKind::ShortestPath => {
            let src = two.as_ref().map(|v| v[0]).or(one).ok_or_else(|| missing("source"))?;
            params.set("source", Value::Node(src));
            if let Some(v) = &two {
                params.set("target", Value::Node(v[1]));
            }
        }
        TaskKind::Connectivity => {
            let v = two.ok_or_else(|| missing(if one.is_some() { "target" } else { "source" }))?;
            params.set("source", Value::Node(v[0]));
            params.set("target", Value::Node(v[1]));
        }
        TaskKind::MaxFlow => {
            let src = one.or(two.as_ref().map(|v| v[0])).ok_or_else(|| missing("source"))?;
            let snk = sink_node.or(two.as_ref().map(|v| v[1])).ok_or_else(|| missing("sink"))?;
            params.set("source", Value::Node(src));
            params.set("sink", Value::Node(snk));
        }
        TaskKind::PageRank => {
            let k = top.captures_iter(lower).find_map(|c| c.get(1).or(c.get(2)).and_then(|m| number_word(m.as_str())));
            if let Some(k) = k {
                params.set("top_k", Value::Int(k));
            }
        }
        _ => {}
    }
    Ok(params)
}

/// Prompt asking a model to design a program for `text`, given the
/// best-matching library templates as worked examples.
pub fn composition_prompt(text: &str, k: usize) -> String {
    let mut out = format!("{PARADIGM}\n\nHere are distributed algorithms from the library:\n\n");
    for (task, _) in retrieve_templates(text, k) {
        out.push_str(&task.library_program().template().to_string());
        out.push('\n');
    }
    out.push_str(
        "Design a distributed algorithm for the problem below in the same six-part form \
         (State, Message, Initialization, Send, Update, Termination). If one of the \
         algorithms above already solves it, name it instead.\n\n## Problem\n",
    );
    out.push_str(text);
    out.push('\n');
    out
}
