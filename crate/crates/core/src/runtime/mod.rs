//! Bulk-synchronous superstep engine.
//!
//! Every agent initializes and sends once; then each superstep delivers the
//! previous round's messages, runs Update on every agent, publishes the new
//! states at the barrier, and runs Send. Messages produced in round `i` are
//! only visible in round `i + 1`.

use std::borrow::Cow;
use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::backend::{AgentBackend, BackendError, Phase, PhaseOutput, PhaseRequest};
use crate::graph::{Graph, NodeId};
use crate::programs::{AgentView, ProgramError, StateTable, VertexProgram};
use crate::value::{Payload, Value, VertexState, FLOAT_CHANGE_TOLERANCE};

mod trace;

pub use trace::{Trace, TraceRound};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Envelope {
    pub sender: NodeId,
    pub recipient: NodeId,
    /// Superstep in which the message was produced (0 = initial send).
    pub sent_round: usize,
    pub payload: Payload,
}

/// Order in which agents are evaluated within a superstep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    Sequential,
    /// A fresh random permutation each phase, seeded.
    Permuted(u64),
    Parallel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EngineConfig {
    /// Iteration cap; `None` uses the program's default (node count + 1 for most).
    pub max_supersteps: Option<usize>,
    /// Sort every inbox by sender id before Update.
    pub deterministic_order: bool,
    pub trace_enabled: bool,
    pub schedule: Schedule,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            max_supersteps: None,
            deterministic_order: true,
            trace_enabled: false,
            schedule: Schedule::Sequential,
        }
    }
}

impl EngineConfig {
    pub fn with_max_supersteps(mut self, n: usize) -> Self {
        self.max_supersteps = Some(n);
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.trace_enabled = true;
        self
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    /// A full superstep left every state unchanged.
    Converged,
    TerminationRuleMet,
    IterationCapReached,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::TerminationRuleMet => "termination_rule_met",
            Termination::IterationCapReached => "iteration_cap_reached",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub final_states: BTreeMap<NodeId, VertexState>,
    pub supersteps_executed: usize,
    pub termination: Termination,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Trace>,
}

impl RunResult {
    /// Appendix-style result block, one `Node: v  State: ...` line per agent.
    pub fn render_states(&self, program: &dyn VertexProgram) -> String {
        self.final_states
            .iter()
            .map(|(v, s)| format!("Node: {v}  State: {}", program.state_schema().render_inline(s)))
            .collect::<Vec<_>>()
            .join("\n")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Program(#[from] ProgramError),
    #[error("schema violation at node {node} ({phase}): {detail}")]
    SchemaViolation { node: NodeId, phase: Phase, detail: String },
    #[error("agent {node} failed during {phase}: {source}")]
    BackendFailure {
        node: NodeId,
        phase: Phase,
        #[source]
        source: BackendError,
    },
}

/// Stable identity of one run, used to key recorded agent exchanges.
pub fn run_key(problem_text: Option<&str>, program: &dyn VertexProgram, graph: &Graph) -> String {
    let mut h = Sha256::new();
    if let Some(text) = problem_text {
        h.update(text.as_bytes());
    }
    h.update([0]);
    h.update(program.name().as_bytes());
    h.update([0]);
    for (k, v) in program.params().iter() {
        h.update(format!("{k}={v};").as_bytes());
    }
    h.update([0]);
    h.update(graph.to_text().as_bytes());
    hex::encode(&h.finalize()[..16])
}

pub struct Engine<'a> {
    graph: Cow<'a, Graph>,
    program: &'a dyn VertexProgram,
    backend: &'a dyn AgentBackend,
    cfg: EngineConfig,
    cap: usize,
    run_key: String,
    states: Vec<VertexState>,
    inboxes: Vec<Vec<Envelope>>,
    aggregate: Option<Value>,
    round: usize,
    initialized: bool,
    trace: Option<Trace>,
    pool: Option<rayon::ThreadPool>,
}

impl<'a> Engine<'a> {
    pub fn new(
        graph: &'a Graph,
        program: &'a dyn VertexProgram,
        backend: &'a dyn AgentBackend,
        cfg: EngineConfig,
    ) -> Result<Self, RunError> {
        Self::with_problem(graph, program, backend, cfg, None)
    }

    /// Like [`Engine::new`], with the originating problem text folded into the run key.
    pub fn with_problem(
        graph: &'a Graph,
        program: &'a dyn VertexProgram,
        backend: &'a dyn AgentBackend,
        cfg: EngineConfig,
        problem_text: Option<&str>,
    ) -> Result<Self, RunError> {
        program.validate(graph)?;
        let graph: Cow<'a, Graph> = if program.undirected_view() && graph.is_directed() {
            Cow::Owned(graph.to_undirected())
        } else {
            Cow::Borrowed(graph)
        };
        let cap = match cfg.max_supersteps {
            Some(0) => return Err(RunError::InvalidConfig("max_supersteps must be at least 1".into())),
            Some(n) => n,
            None => program.default_max_supersteps(graph.node_count()).max(1),
        };
        let pool = match (cfg.schedule, backend.max_concurrency()) {
            (Schedule::Parallel, Some(limit)) => Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(limit.max(1))
                    .build()
                    .map_err(|e| RunError::InvalidConfig(e.to_string()))?,
            ),
            _ => None,
        };
        let run_key = run_key(problem_text, program, &graph);
        let n = graph.node_count();
        Ok(Engine {
            graph,
            program,
            backend,
            trace: cfg.trace_enabled.then(Trace::default),
            cfg,
            cap,
            run_key,
            states: Vec::new(),
            inboxes: vec![Vec::new(); n],
            aggregate: None,
            round: 0,
            initialized: false,
            pool,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn max_supersteps(&self) -> usize {
        self.cap
    }

    pub fn states(&self) -> StateTable<'_> {
        StateTable::new(self.graph.node_ids(), &self.states)
    }

    /// Messages waiting for delivery in the next superstep.
    pub fn pending(&self) -> impl Iterator<Item = &Envelope> {
        self.inboxes.iter().flatten()
    }

    fn view(&self, i: usize) -> AgentView<'_> {
        let g: &Graph = &self.graph;
        let id = g.node_ids()[i];
        AgentView {
            id,
            node_count: g.node_count(),
            round: self.round,
            directed: g.is_directed(),
            neighbors: g.out_at(i),
            in_neighbors: g.in_at(i),
            has_self_loop: g.has_self_loop(id),
            node_weight: g.node_weight(id),
            feature: g.node_feature(id),
            aggregate: self.aggregate.as_ref(),
        }
    }

    /// Evaluates `f` for every agent according to the schedule. Results are
    /// indexed by agent position; the second value is the evaluation order.
    fn evaluate<T, F>(&self, f: F) -> (Vec<Result<T, RunError>>, Vec<usize>)
    where
        T: Send,
        F: Fn(usize) -> Result<T, RunError> + Sync + Send,
    {
        let n = self.graph.node_count();
        match self.cfg.schedule {
            Schedule::Sequential => ((0..n).map(&f).collect(), (0..n).collect()),
            Schedule::Permuted(seed) => {
                let mut order: Vec<usize> = (0..n).collect();
                let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (self.round as u64).wrapping_mul(0x9E37_79B9));
                order.shuffle(&mut rng);
                let mut slots: Vec<Option<Result<T, RunError>>> = (0..n).map(|_| None).collect();
                for &i in &order {
                    slots[i] = Some(f(i));
                }
                (slots.into_iter().map(|s| s.expect("every slot evaluated")).collect(), order)
            }
            Schedule::Parallel => {
                let run = || (0..n).into_par_iter().map(&f).collect::<Vec<_>>();
                let results = match &self.pool {
                    Some(pool) => pool.install(run),
                    None => run(),
                };
                (results, (0..n).collect())
            }
        }
    }

    fn call(
        &self,
        i: usize,
        phase: Phase,
        state: Option<&VertexState>,
        inbox: &[Envelope],
    ) -> Result<PhaseOutput, RunError> {
        let agent = self.view(i);
        let req = PhaseRequest { run_key: &self.run_key, phase, program: self.program, agent: &agent, state, inbox };
        self.backend.execute_phase(&req).map_err(|source| RunError::BackendFailure { node: agent.id, phase, source })
    }

    fn expect_state(&self, i: usize, phase: Phase, out: PhaseOutput) -> Result<VertexState, RunError> {
        let node = self.graph.node_ids()[i];
        match out {
            PhaseOutput::State(s) => {
                self.program.state_schema().validate(&s).map_err(|e| RunError::SchemaViolation {
                    node,
                    phase,
                    detail: e.to_string(),
                })?;
                Ok(s)
            }
            PhaseOutput::Messages(_) => {
                Err(RunError::SchemaViolation { node, phase, detail: "expected a state, got messages".into() })
            }
        }
    }

    fn expect_messages(&self, i: usize, out: PhaseOutput) -> Result<Vec<Envelope>, RunError> {
        let agent = self.view(i);
        let violation = |detail: String| RunError::SchemaViolation { node: agent.id, phase: Phase::Send, detail };
        let PhaseOutput::Messages(msgs) = out else {
            return Err(violation("expected messages, got a state".into()));
        };
        msgs.into_iter()
            .map(|(recipient, payload)| {
                if !agent.is_neighbor(recipient) {
                    return Err(violation(format!("node {recipient} is not a neighbor")));
                }
                self.program.message_schema().validate(&payload).map_err(|e| violation(e.to_string()))?;
                Ok(Envelope { sender: agent.id, recipient, sent_round: self.round, payload })
            })
            .collect()
    }

    fn first_error<T>(results: Vec<Result<T, RunError>>) -> Result<Vec<T>, RunError> {
        results.into_iter().collect()
    }

    /// Routes outbound messages into next-round inboxes.
    fn route(&mut self, outgoing: Vec<Vec<Envelope>>, order: &[usize]) {
        let mut sent = Vec::new();
        let mut outgoing: Vec<Option<Vec<Envelope>>> = outgoing.into_iter().map(Some).collect();
        for &i in order {
            for env in outgoing[i].take().unwrap_or_default() {
                let dst = self.graph.position(env.recipient).expect("recipient validated");
                if self.trace.is_some() {
                    sent.push(env.clone());
                }
                self.inboxes[dst].push(env);
            }
        }
        if self.cfg.deterministic_order {
            for inbox in &mut self.inboxes {
                inbox.sort_by_key(|e| e.sender);
            }
        }
        if let Some(trace) = &mut self.trace {
            sent.sort_by_key(|e| (e.sender, e.recipient));
            trace.rounds.last_mut().expect("round opened").sent = sent;
        }
    }

    fn send_phase(&mut self) -> Result<(), RunError> {
        let (results, order) = self.evaluate(|i| {
            let out = self.call(i, Phase::Send, Some(&self.states[i]), &[])?;
            self.expect_messages(i, out)
        });
        let outgoing = Self::first_error(results)?;
        self.route(outgoing, &order);
        Ok(())
    }

    /// Initialization followed by the initial Send.
    pub fn initialize(&mut self) -> Result<(), RunError> {
        if self.initialized {
            return Ok(());
        }
        self.round = 0;
        let (results, _) = self.evaluate(|i| {
            let out = self.call(i, Phase::Init, None, &[])?;
            self.expect_state(i, Phase::Init, out)
        });
        self.states = Self::first_error(results)?;
        self.aggregate = self.program.aggregate(self.states());
        if let Some(trace) = &mut self.trace {
            trace.rounds.push(TraceRound {
                round: 0,
                consumed: Vec::new(),
                updated: self.graph.node_ids().iter().copied().zip(self.states.iter().cloned()).collect(),
                sent: Vec::new(),
                changed: true,
            });
        }
        self.initialized = true;
        self.send_phase()
    }

    /// One receive → update → send round. Returns whether any state changed.
    pub fn superstep(&mut self) -> Result<bool, RunError> {
        self.initialize()?;
        self.round += 1;
        let inboxes = std::mem::replace(&mut self.inboxes, vec![Vec::new(); self.graph.node_count()]);

        let (results, _) = self.evaluate(|i| {
            let out = self.call(i, Phase::Update, Some(&self.states[i]), &inboxes[i])?;
            self.expect_state(i, Phase::Update, out)
        });
        let new_states = Self::first_error(results)?;

        let mut updated = Vec::new();
        let mut changed = false;
        for (i, (old, new)) in self.states.iter().zip(&new_states).enumerate() {
            if !old.approx_eq(new, FLOAT_CHANGE_TOLERANCE) {
                changed = true;
                if self.trace.is_some() {
                    updated.push((self.graph.node_ids()[i], new.clone()));
                }
            }
        }
        // Barrier: states become visible only after every Update finished.
        self.states = new_states;
        self.aggregate = self.program.aggregate(self.states());

        if let Some(trace) = &mut self.trace {
            trace.rounds.push(TraceRound {
                round: self.round,
                consumed: inboxes.into_iter().flatten().collect(),
                updated,
                sent: Vec::new(),
                changed,
            });
        }
        self.send_phase()?;
        Ok(changed)
    }

    /// Runs until quiescence, the termination rule, or the iteration cap.
    pub fn run(mut self) -> Result<RunResult, RunError> {
        self.initialize()?;
        let termination = if self.program.terminated(self.states(), self.round) {
            Termination::TerminationRuleMet
        } else {
            loop {
                if self.round >= self.cap {
                    break Termination::IterationCapReached;
                }
                if !self.superstep()? {
                    break Termination::Converged;
                }
                if self.program.terminated(self.states(), self.round) {
                    break Termination::TerminationRuleMet;
                }
            }
        };
        Ok(self.finish(termination))
    }

    fn finish(self, termination: Termination) -> RunResult {
        let final_states = self.graph.node_ids().iter().copied().zip(self.states).collect();
        RunResult { final_states, supersteps_executed: self.round, termination, trace: self.trace }
    }
}

/// Convenience wrapper: build an engine and run it to completion.
pub fn run(
    graph: &Graph,
    program: &dyn VertexProgram,
    backend: &dyn AgentBackend,
    cfg: EngineConfig,
) -> Result<RunResult, RunError> {
    Engine::new(graph, program, backend, cfg)?.run()
}
