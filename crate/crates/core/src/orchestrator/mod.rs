//! The master pipeline: classify the problem, build the graph and the
//! parameterized program, run it, and summarize the final states.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::backend::AgentBackend;
use crate::graph::{parse_graph, Graph, GraphError, NodeId};
use crate::programs::{
    Bipartite, Connectivity, CycleDetection, HamiltonHeuristic, MaxFlow, PageRank, ProgramError, ShortestPath,
    TopologicalSort, TriangleSum, VertexProgram,
};
use crate::runtime::{Engine, EngineConfig, RunError, RunResult, Termination};
use crate::value::{Record, Value};

mod answer;
mod classify;

pub use answer::{parse_narrative, summarize, summarize_flow, Answer, AnswerKind, AnswerValue};
pub use classify::{
    classify_as, classify_problem, classify_with, composition_prompt, retrieve_templates, ClassifierConfig,
    DEFAULT_THRESHOLD, DEFAULT_TOP_K,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Cycle,
    Connectivity,
    Bipartite,
    TopoSort,
    ShortestPath,
    TriangleSum,
    MaxFlow,
    PageRank,
    HamiltonHeuristic,
}

impl TaskKind {
    pub const ALL: [TaskKind; 9] = [
        TaskKind::Cycle,
        TaskKind::Connectivity,
        TaskKind::Bipartite,
        TaskKind::TopoSort,
        TaskKind::ShortestPath,
        TaskKind::TriangleSum,
        TaskKind::MaxFlow,
        TaskKind::PageRank,
        TaskKind::HamiltonHeuristic,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Cycle => "cycle",
            TaskKind::Connectivity => "connectivity",
            TaskKind::Bipartite => "bipartite",
            TaskKind::TopoSort => "topological_sort",
            TaskKind::ShortestPath => "shortest_path",
            TaskKind::TriangleSum => "triangle_sum",
            TaskKind::MaxFlow => "max_flow",
            TaskKind::PageRank => "pagerank",
            TaskKind::HamiltonHeuristic => "hamilton",
        }
    }

    /// Parameters the task cannot run without.
    pub fn required_params(self) -> &'static [&'static str] {
        match self {
            TaskKind::ShortestPath => &["source"],
            TaskKind::Connectivity => &["source", "target"],
            TaskKind::MaxFlow => &["source", "sink"],
            _ => &[],
        }
    }

    /// A representative program, used for template listings and prompts.
    pub fn library_program(self) -> Box<dyn VertexProgram> {
        match self {
            TaskKind::Cycle => Box::new(CycleDetection::new()),
            TaskKind::Connectivity => Box::new(Connectivity::new(0, 0)),
            TaskKind::Bipartite => Box::new(Bipartite::new()),
            TaskKind::TopoSort => Box::new(TopologicalSort::new()),
            TaskKind::ShortestPath => Box::new(ShortestPath::new(0)),
            TaskKind::TriangleSum => Box::new(TriangleSum::new()),
            TaskKind::MaxFlow => Box::new(crate::programs::AugmentingPathSearch::new(0, 0)),
            TaskKind::PageRank => Box::new(PageRank::default()),
            TaskKind::HamiltonHeuristic => Box::new(HamiltonHeuristic::new(0)),
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TaskKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let key = s.trim().to_ascii_lowercase().replace(['-', ' '], "_");
        Ok(match key.as_str() {
            "cycle" | "cycle_detection" => TaskKind::Cycle,
            "connectivity" | "connected" => TaskKind::Connectivity,
            "bipartite" | "bipartite_check" => TaskKind::Bipartite,
            "topological_sort" | "topo_sort" | "toposort" | "topology" => TaskKind::TopoSort,
            "shortest_path" | "shortest" => TaskKind::ShortestPath,
            "triangle_sum" | "triangle" | "maximum_triangle_sum" => TaskKind::TriangleSum,
            "max_flow" | "maximum_flow" | "flow" => TaskKind::MaxFlow,
            "pagerank" | "page_rank" => TaskKind::PageRank,
            "hamilton" | "hamilton_path" | "hamilton_heuristic" | "hamiltonian_path" => TaskKind::HamiltonHeuristic,
            _ => return Err(format!("unknown task `{s}`")),
        })
    }
}

/// A classified problem: which task, the text holding the graph, and the
/// extracted parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemSpec {
    pub task: TaskKind,
    pub graph_text: String,
    pub directed: bool,
    pub weighted: bool,
    /// `source`, `target`, `sink` (node ids) and `top_k` (integer) as the task needs.
    pub params: Record,
}

impl ProblemSpec {
    pub fn node_param(&self, name: &str) -> Option<NodeId> {
        match self.params.get(name) {
            Some(Value::Node(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn top_k(&self) -> Option<usize> {
        match self.params.get("top_k") {
            Some(Value::Int(k)) if *k > 0 => Some(*k as usize),
            _ => None,
        }
    }

    pub fn parse_graph(&self) -> Result<Graph, GraphError> {
        parse_graph(&self.graph_text, self.directed, self.weighted)
    }

    /// Every node-valued parameter must name a node of the graph.
    pub fn check_nodes(&self, graph: &Graph) -> Result<(), ProgramError> {
        for (_, v) in self.params.iter() {
            if let Value::Node(id) = v {
                if !graph.contains(*id) {
                    return Err(ProgramError::UnknownNode(*id));
                }
            }
        }
        Ok(())
    }

    fn require(&self, name: &str) -> Result<NodeId, OrchestratorError> {
        self.node_param(name).ok_or(OrchestratorError::MissingParameter { task: self.task, param: name.to_string() })
    }

    /// Builds the parameterized program for this problem.
    pub fn program(&self, graph: &Graph) -> Result<Box<dyn VertexProgram>, OrchestratorError> {
        self.check_nodes(graph)?;
        Ok(match self.task {
            TaskKind::Cycle => Box::new(CycleDetection::new()),
            TaskKind::Connectivity => Box::new(Connectivity::new(self.require("source")?, self.require("target")?)),
            TaskKind::Bipartite => Box::new(Bipartite::new()),
            TaskKind::TopoSort => Box::new(TopologicalSort::new()),
            TaskKind::ShortestPath => Box::new(ShortestPath::new(self.require("source")?)),
            TaskKind::TriangleSum => Box::new(TriangleSum::new()),
            TaskKind::PageRank => Box::new(PageRank::default()),
            TaskKind::HamiltonHeuristic => {
                let start = graph.node_ids().first().copied().unwrap_or(0);
                Box::new(HamiltonHeuristic::new(start))
            }
            TaskKind::MaxFlow => {
                return Err(OrchestratorError::Unsupported("max flow runs as a master loop, see MaxFlow::run".into()))
            }
        })
    }
}

/// Pipeline errors, labeled by stage.
#[derive(Debug, thiserror::Error)]
pub enum OrchestratorError {
    #[error("classify: no algorithm template matches the problem")]
    NoMatchingTemplate,
    #[error("classify: ambiguous task, tied between {0:?}")]
    AmbiguousTask(Vec<TaskKind>),
    #[error("classify: task {task} needs parameter `{param}`")]
    MissingParameter { task: TaskKind, param: String },
    #[error("classify: {0}")]
    Unsupported(String),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("program: {0}")]
    Program(#[from] ProgramError),
    #[error("run: {0}")]
    Run(#[from] RunError),
    #[error("summarize: the graph is not a DAG; nodes {0:?} never reach in-degree 0")]
    NotADag(Vec<NodeId>),
    #[error("summarize: inconsistent states: {0}")]
    InconsistentStates(String),
}

/// Answer plus run statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub task: TaskKind,
    pub answer: Answer,
    pub supersteps: usize,
    pub termination: Termination,
}

/// Runs a classified problem end to end.
pub fn solve_spec(
    spec: &ProblemSpec,
    problem_text: Option<&str>,
    backend: &dyn AgentBackend,
    cfg: &EngineConfig,
) -> Result<Solution, OrchestratorError> {
    let graph = spec.parse_graph()?;
    if spec.task == TaskKind::MaxFlow {
        spec.check_nodes(&graph)?;
        let flow = MaxFlow::new(spec.require("source")?, spec.require("sink")?);
        let outcome = flow.run(&graph, backend, cfg).map_err(|e| match e {
            RunError::Program(p) => OrchestratorError::Program(p),
            other => OrchestratorError::Run(other),
        })?;
        return Ok(Solution {
            task: spec.task,
            answer: summarize_flow(&outcome, spec),
            supersteps: outcome.supersteps,
            termination: Termination::Converged,
        });
    }
    let program = spec.program(&graph)?;
    let result = run_program(&graph, program.as_ref(), problem_text, backend, cfg)?;
    let answer = summarize(&result, spec)?;
    Ok(Solution { task: spec.task, answer, supersteps: result.supersteps_executed, termination: result.termination })
}

fn run_program(
    graph: &Graph,
    program: &dyn VertexProgram,
    problem_text: Option<&str>,
    backend: &dyn AgentBackend,
    cfg: &EngineConfig,
) -> Result<RunResult, OrchestratorError> {
    let engine = Engine::with_problem(graph, program, backend, cfg.clone(), problem_text).map_err(|e| match e {
        RunError::Program(p) => OrchestratorError::Program(p),
        other => OrchestratorError::Run(other),
    })?;
    Ok(engine.run()?)
}

/// classify → parse → build → run → summarize.
pub fn solve(text: &str, backend: &dyn AgentBackend, cfg: &EngineConfig) -> Result<Solution, OrchestratorError> {
    let spec = classify_problem(text)?;
    solve_spec(&spec, Some(text), backend, cfg)
}

/// Runs a classified problem and also returns the raw run (not available for max flow).
pub fn solve_with_run(
    spec: &ProblemSpec,
    problem_text: Option<&str>,
    backend: &dyn AgentBackend,
    cfg: &EngineConfig,
) -> Result<(Solution, RunResult), OrchestratorError> {
    let graph = spec.parse_graph()?;
    let program = spec.program(&graph)?;
    let result = run_program(&graph, program.as_ref(), problem_text, backend, cfg)?;
    let answer = summarize(&result, spec)?;
    let solution =
        Solution { task: spec.task, answer, supersteps: result.supersteps_executed, termination: result.termination };
    Ok((solution, result))
}
