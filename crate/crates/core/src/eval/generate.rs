//! Seeded random instances in the benchmark's task families and phrasings.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::oracle::{oracle_solve, OracleError};
use crate::graph::{Edge, Graph, NodeId};
use crate::number::Number;
use crate::orchestrator::{AnswerValue, TaskKind};
use crate::value::{Record, Value};

/// Node-count range per task. PageRank is not part of the benchmark table
/// and shares the widest range.
pub fn node_range(task: TaskKind) -> (usize, usize) {
    match task {
        TaskKind::Cycle | TaskKind::Connectivity | TaskKind::Bipartite | TaskKind::ShortestPath => (2, 100),
        TaskKind::TopoSort | TaskKind::MaxFlow | TaskKind::HamiltonHeuristic => (2, 50),
        TaskKind::TriangleSum => (2, 25),
        TaskKind::PageRank => (2, 100),
    }
}

/// Edge-count knobs: expected degree is drawn uniformly from this range.
pub const EXPECTED_DEGREE: (f64, f64) = (2.0, 6.0);
/// Edge and node weights are drawn uniformly from this range.
pub const WEIGHT_RANGE: (i64, i64) = (1, 10);

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("size {size} is outside the {task} range [{min}, {max}]")]
    SizeOutOfRange { task: TaskKind, size: usize, min: usize, max: usize },
    #[error("size must be at least 2")]
    TooSmall,
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSpec {
    pub task: TaskKind,
    pub size: usize,
    pub seed: u64,
    pub node_range: (usize, usize),
    /// Mean degree the edge probability was tuned for.
    pub expected_degree: f64,
    pub rendered_text: String,
    #[serde(skip)]
    pub graph: Graph,
    #[serde(skip)]
    pub params: Record,
    pub oracle_answer: AnswerValue,
}

fn rng_for(task: TaskKind, size: usize, seed: u64) -> ChaCha8Rng {
    let tag = TaskKind::ALL.iter().position(|t| *t == task).expect("listed") as u64;
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(size as u64).to_le_bytes());
    key[16..24].copy_from_slice(&tag.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Deterministic per `(task, size, seed)`; `size` must lie in [`node_range`].
pub fn generate_instance(task: TaskKind, size: usize, seed: u64) -> Result<InstanceSpec, GenError> {
    let (min, max) = node_range(task);
    if !(min..=max).contains(&size) {
        return Err(GenError::SizeOutOfRange { task, size, min, max });
    }
    generate_instance_unbounded(task, size, seed)
}

/// Same generator without the range check, for scale experiments.
pub fn generate_instance_unbounded(task: TaskKind, size: usize, seed: u64) -> Result<InstanceSpec, GenError> {
    if size < 2 {
        return Err(GenError::TooSmall);
    }
    let mut rng = rng_for(task, size, seed);
    let degree = rng.gen_range(EXPECTED_DEGREE.0..=EXPECTED_DEGREE.1);
    let p = (degree / (size - 1) as f64).min(1.0);
    let n = size as NodeId;
    let weight = |rng: &mut ChaCha8Rng| Number::Int(rng.gen_range(WEIGHT_RANGE.0..=WEIGHT_RANGE.1));

    let (directed, weighted) = match task {
        TaskKind::ShortestPath => (false, true),
        TaskKind::MaxFlow => (true, true),
        TaskKind::TopoSort | TaskKind::PageRank => (true, false),
        _ => (false, false),
    };

    let mut edges = Vec::new();
    match task {
        TaskKind::TopoSort => {
            let mut perm: Vec<NodeId> = (0..n).collect();
            perm.shuffle(&mut rng);
            for i in 0..perm.len() {
                for j in i + 1..perm.len() {
                    if rng.gen_bool(p) {
                        edges.push(Edge::new(perm[i], perm[j]));
                    }
                }
            }
        }
        TaskKind::MaxFlow | TaskKind::PageRank => {
            // ordered pairs at half the rate keep the total degree on target
            for u in 0..n {
                for v in 0..n {
                    if u != v && rng.gen_bool(p / 2.0) {
                        edges.push(if weighted { Edge::weighted(u, v, weight(&mut rng)) } else { Edge::new(u, v) });
                    }
                }
            }
        }
        TaskKind::Cycle if rng.gen_bool(0.5) => {
            // a random forest, so that roughly half the answers are "No"
            for v in 1..n {
                if rng.gen_bool(0.9) {
                    edges.push(Edge::new(rng.gen_range(0..v), v));
                }
            }
        }
        TaskKind::Bipartite if rng.gen_bool(0.5) => {
            let side: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            for u in 0..n {
                for v in u + 1..n {
                    if side[u as usize] != side[v as usize] && rng.gen_bool((2.0 * p).min(1.0)) {
                        edges.push(Edge::new(u, v));
                    }
                }
            }
        }
        _ => {
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(p) {
                        let (a, b) = if rng.gen_bool(0.5) { (u, v) } else { (v, u) };
                        edges.push(if weighted { Edge::weighted(a, b, weight(&mut rng)) } else { Edge::new(a, b) });
                    }
                }
            }
        }
    }
    edges.shuffle(&mut rng);

    let mut graph = Graph::new(0..n, edges, directed, weighted).expect("generated edges are in range");
    if task == TaskKind::TriangleSum {
        let weights = (0..n).map(|v| (v, weight(&mut rng))).collect();
        graph = graph.with_node_weights(weights).expect("every node weighted");
    }

    let mut params = Record::new();
    let pick_two = |rng: &mut ChaCha8Rng| {
        let a = rng.gen_range(0..n);
        let mut b = rng.gen_range(0..n - 1);
        if b >= a {
            b += 1;
        }
        (a, b)
    };
    match task {
        TaskKind::ShortestPath => params.set("source", Value::Node(rng.gen_range(0..n))),
        TaskKind::Connectivity => {
            let (s, t) = pick_two(&mut rng);
            params.set("source", Value::Node(s));
            params.set("target", Value::Node(t));
        }
        TaskKind::MaxFlow => {
            let (s, t) = pick_two(&mut rng);
            params.set("source", Value::Node(s));
            params.set("sink", Value::Node(t));
        }
        TaskKind::PageRank => params.set("top_k", Value::Int(3.min(size) as i64)),
        _ => {}
    }

    let rendered_text = render(task, &graph, &params);
    let oracle_answer = oracle_solve(task, &graph, &params)?;
    Ok(InstanceSpec {
        task,
        size,
        seed,
        node_range: node_range(task),
        expected_degree: degree,
        rendered_text,
        graph,
        params,
        oracle_answer,
    })
}

fn node(params: &Record, name: &str) -> NodeId {
    params.node(name).expect("generator sets the parameter")
}

/// Problem text in the benchmark's phrasing for `task`.
pub fn render(task: TaskKind, g: &Graph, params: &Record) -> String {
    let graph = g.to_text();
    match task {
        TaskKind::Cycle => format!(
            "Determine whether or not there is a cycle in an undirected graph. In an undirected graph, (i,j) means that node i and node j are connected with an undirected edge. Given a graph, you need to output Yes or No, indicating whether there is a cycle in the graph. Q: {graph}. Is there a cycle in this graph?"
        ),
        TaskKind::Connectivity => format!(
            "Determine whether two nodes are connected in an undirected graph. In an undirected graph, (i,j) means that node i and node j are connected with an undirected edge. Given a graph and a pair of nodes, you need to output Yes or No, indicating whether the node i and node j are connected. Q: {graph}. Is there a path between node {} and node {}?",
            node(params, "source"),
            node(params, "target")
        ),
        TaskKind::Bipartite => format!(
            "Determine whether or not a graph is bipartite. In a undirected graph, (i,j) means that node i and node j are connected with an undirected edge. Given a graph, you need to output Yes or No, indicating whether the graph is bipartite. Q: {graph}. Is this graph bipartite?"
        ),
        TaskKind::TopoSort => format!(
            "Find one of the topological sorting paths of the given graph. In a directed graph, (i->j) means that node i and node j are connected with a directed edge from node i to node j. Given a graph, you need to output one of the topological sorting paths of the graph. Q: {graph}. Give one topological sorting path of this graph."
        ),
        TaskKind::ShortestPath => format!(
            "Find the shortest distance from a source node to other nodes in an undirected graph. In an undirected graph, (i,j,k) means that node i and node j are connected with an undirected edge with weight k. {graph}. Give the weight of the shortest distance from node {} to other node.",
            node(params, "source")
        ),
        TaskKind::TriangleSum => format!(
            "Find the maximum sum of weights for any connected triplet of vertices (three nodes that are pairwise connected) in an undirected graph. [i, k] means that node i has the weight k. (i,j) means that node i and node j are connected with an undirected edge. Q: {graph}. What is the maximum sum of the weights of three interconnected nodes?"
        ),
        TaskKind::MaxFlow => format!(
            "Find the maximum flow between two nodes in a directed graph. In a directed graph, (i->j,k) means that node i and node j are connected with a directed edge from node i to node j with weight k. Given a graph and a pair of nodes, you need to output the maximum flow between the two nodes. Q: {graph}. What is the maximum flow from node {} to node {}?",
            node(params, "source"),
            node(params, "sink")
        ),
        TaskKind::PageRank => format!(
            "Rank the web pages of a small link network by importance using PageRank. In a directed graph, (i->j) means that page i links to page j. Q: {graph}. Which are the {} most important nodes?",
            params.int("top_k").unwrap_or(3)
        ),
        TaskKind::HamiltonHeuristic => format!(
            "Determine whether or not there is a Hamiltonian path in an undirected graph. In an undirected graph, (i,j) means that node i and node j are connected with an undirected edge. Given a graph, you need to output Yes or No, indicating whether there is a Hamiltonian path in the graph. Q: {graph}. Is there a Hamiltonian path in this graph?"
        ),
    }
}
