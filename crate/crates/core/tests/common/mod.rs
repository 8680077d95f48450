//! Helpers shared by the integration tests and the acceptance target.
//! Every property takes a seed and returns `Err(description)` on violation.

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use std::sync::Arc;

use agentgraph::backend::{LlmBackend, RuleEchoTransport, TranscriptStore, DEFAULT_MODEL};
use agentgraph::eval::oracle::{adjacency, bellman_ford_truncated, dijkstra};
use agentgraph::orchestrator::{classify_problem, solve_with_run, OrchestratorError, Solution};
use agentgraph::programs::{
    AgentView, Bipartite, Connectivity, CycleDetection, HamiltonHeuristic, Outgoing, PageRank, RuleError, ShortestPath,
    Template, TopologicalSort, TriangleSum,
};
use agentgraph::runtime::{Envelope, Schedule};
use agentgraph::value::{FieldSpec, Schema, FLOAT_CHANGE_TOLERANCE};
use agentgraph::{
    AgentBackend, BackendConfig, BackendMode, DeterministicBackend, Edge, Engine, EngineConfig, Graph, NodeId, Number,
    Record, RunError, RunResult, Termination, Value, ValueKind, VertexProgram, VertexState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const APPENDIX_SP: &str = "Find the shortest distance from a source node to other nodes in an undirected graph. In an undirected graph, (i,j,k) means that node i and node j are connected with an undirected edge with weight k. The graph has 8 nodes, and the edges are: (0,7,9) (0,1,7) (0,4,9) (1,7,1) (2,7,7) (2,6,5) (2,5,8) (3,5,9) (3,4,8) (3,6,1) (4,7,7) (4,5,6) (5,7,6). Give the weight of the shortest distance from node 1 to other node.";

/// Result block printed after the appendix shortest-path execution.
pub const APPENDIX_SP_BLOCK: &str = "Node: 0  State: 1. distance: 7
Node: 1  State: 1. distance: 0
Node: 2  State: 1. distance: 8
Node: 3  State: 1. distance: 14
Node: 4  State: 1. distance: 8
Node: 5  State: 1. distance: 7
Node: 6  State: 1. distance: 13
Node: 7  State: 1. distance: 1";

pub const APPENDIX_SP_DISTANCES: [(NodeId, i64); 8] =
    [(0, 7), (1, 0), (2, 8), (3, 14), (4, 8), (5, 7), (6, 13), (7, 1)];

pub const APPENDIX_HAM: &str = "Determine whether or not there is a Hamiltonian path in an undirected graph. In an undirected graph, (i,j) means that node i and node j are connected with an undirected edge. Given a graph, you need to output Yes or No, indicating whether there is a Hamiltonian path in the graph. Q: The nodes are numbered from 0 to 5, and the edges are: (0, 3) (0, 1) (0, 2) (0, 4) (1, 5) (1, 4) (1, 2) (1, 3) (2, 4) (2, 5) (3, 5) (3, 4). Is there a Hamiltonian path in this graph?";

/// Recorded agent exchanges for the appendix shortest-path run.
pub fn replay_fixture_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/appendix_shortest_path")
}

/// Runs `text` through the pipeline with a traced engine.
pub fn solve_traced(text: &str, backend: &dyn AgentBackend) -> Result<(Solution, RunResult), OrchestratorError> {
    let spec = classify_problem(text)?;
    solve_with_run(&spec, Some(text), backend, &EngineConfig::default().with_trace())
}

/// Runs the appendix problem through the prompt path with an obedient model,
/// recording every exchange into `dir`.
pub fn record_appendix(dir: &std::path::Path) -> Result<RunResult, String> {
    let store = Arc::new(TranscriptStore::open(dir).map_err(|e| e.to_string())?);
    let backend = LlmBackend::new(Box::new(RuleEchoTransport), DEFAULT_MODEL).recording_to(store);
    solve_traced(APPENDIX_SP, &backend).map(|(_, r)| r).map_err(|e| e.to_string())
}

/// Replay backend over the committed fixture, built the way the CLI builds it.
pub fn replay_backend(dir: PathBuf) -> Result<Box<dyn AgentBackend>, String> {
    let cfg = BackendConfig { mode: BackendMode::Replay, transcript_store: Some(dir), ..Default::default() };
    cfg.build().map_err(|e| e.to_string())
}

/// Replays the fixture and compares the run with the deterministic one.
pub fn replay_matches_deterministic() -> Result<RunResult, String> {
    let replay = replay_backend(replay_fixture_dir())?;
    let (_, replayed) = solve_traced(APPENDIX_SP, replay.as_ref()).map_err(|e| e.to_string())?;
    let (_, reference) = solve_traced(APPENDIX_SP, &DeterministicBackend).map_err(|e| e.to_string())?;
    if replayed != reference {
        return Err("replayed run differs from the deterministic run".into());
    }
    let program = ShortestPath::new(1);
    let block = replayed.render_states(&program);
    if block != APPENDIX_SP_BLOCK {
        return Err(format!("result block differs:\n{block}"));
    }
    Ok(replayed)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Small random graph on nodes `0..n`; weights are ints in `0..=9` when weighted.
pub fn random_graph(rng: &mut ChaCha8Rng, max_nodes: usize, directed: bool, weighted: bool) -> Graph {
    let n = rng.gen_range(1..=max_nodes);
    let p = rng.gen_range(0.05..0.6);
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        let lo = if directed { 0 } else { u };
        for v in lo..n as NodeId {
            let loop_ok = u != v || rng.gen_bool(0.05);
            if loop_ok && rng.gen_bool(p) {
                edges.push(if weighted { Edge::weighted(u, v, rng.gen_range(0..10i64)) } else { Edge::new(u, v) });
            }
        }
    }
    let weights: BTreeMap<NodeId, Number> = (0..n as NodeId).map(|v| (v, Number::Int(rng.gen_range(1..10)))).collect();
    Graph::new(0..n as NodeId, edges, directed, weighted)
        .and_then(|g| g.with_node_weights(weights))
        .expect("generated graph is valid")
}

/// Every library program that accepts `g`, parameterized from `rng`.
pub fn library_programs(rng: &mut ChaCha8Rng, g: &Graph) -> Vec<Box<dyn VertexProgram>> {
    let n = g.node_count() as NodeId;
    let pick = |rng: &mut ChaCha8Rng| rng.gen_range(0..n);
    let mut out: Vec<Box<dyn VertexProgram>> = vec![
        Box::new(CycleDetection::new()),
        Box::new(Connectivity::new(pick(rng), pick(rng))),
        Box::new(Bipartite::new()),
        Box::new(TriangleSum::new()),
        Box::new(PageRank::default()),
        Box::new(HamiltonHeuristic::new(pick(rng))),
    ];
    if g.is_weighted() {
        out.push(Box::new(ShortestPath::new(pick(rng))));
    }
    if g.is_directed() {
        out.push(Box::new(TopologicalSort::new()));
    }
    out
}

fn cfg(schedule: Schedule) -> EngineConfig {
    EngineConfig::default().with_trace().with_schedule(schedule)
}

fn run_with(g: &Graph, p: &dyn VertexProgram, cfg: EngineConfig) -> Result<RunResult, String> {
    agentgraph::run(g, p, &DeterministicBackend, cfg).map_err(|e| format!("{}: {e}", p.name()))
}

/// Test program with an order-sensitive update: any leak of a same-round
/// state or a lost/duplicated message changes the result.
pub struct Accumulate {
    state: Schema,
    message: Schema,
}

const MODULUS: i64 = 1_000_003;

impl Accumulate {
    pub fn new() -> Self {
        let field = |doc| vec![FieldSpec { name: "value", kind: ValueKind::Int, doc }];
        Accumulate { state: Schema::new(field("running value")), message: Schema::new(field("sender value")) }
    }

    pub fn initial(v: NodeId) -> i64 {
        (v as i64 * 7919 + 13) % MODULUS
    }

    pub fn step(own: i64, received: &[(NodeId, i64)]) -> i64 {
        received.iter().fold(own * 3 % MODULUS, |acc, (s, x)| (acc + (*s as i64 + 1) * x) % MODULUS)
    }
}

impl VertexProgram for Accumulate {
    fn name(&self) -> &'static str {
        "accumulate"
    }

    fn state_schema(&self) -> &Schema {
        &self.state
    }

    fn message_schema(&self) -> &Schema {
        &self.message
    }

    fn init(&self, agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        Ok(Record::new().with("value", Value::Int(Self::initial(agent.id))))
    }

    fn send(&self, agent: &AgentView<'_>, state: &VertexState) -> Result<Outgoing, RuleError> {
        let x = state.int("value")?;
        Ok(agent.neighbors.iter().map(|nb| (nb.id, Record::new().with("value", Value::Int(x)))).collect())
    }

    fn update(
        &self,
        _agent: &AgentView<'_>,
        state: &VertexState,
        inbox: &[Envelope],
    ) -> Result<VertexState, RuleError> {
        let received =
            inbox.iter().map(|e| Ok((e.sender, e.payload.int("value")?))).collect::<Result<Vec<_>, RuleError>>()?;
        Ok(Record::new().with("value", Value::Int(Self::step(state.int("value")?, &received))))
    }

    fn template(&self) -> Template {
        Template {
            name: "accumulate",
            summary: "Mixes neighbor values every round.",
            state: self.state.clone(),
            message: self.message.clone(),
            initialization: vec!["value = id * 7919 + 13".into()],
            send: vec!["send value to every neighbor".into()],
            update: vec!["value = 3 * value + sum (sender + 1) * received".into()],
            termination: vec!["never; bounded by the iteration cap".into()],
        }
    }
}

/// Sends one message to a node that is not adjacent.
pub struct Rogue;

impl VertexProgram for Rogue {
    fn name(&self) -> &'static str {
        "rogue"
    }

    fn state_schema(&self) -> &Schema {
        static S: std::sync::OnceLock<Schema> = std::sync::OnceLock::new();
        S.get_or_init(|| Schema::new(vec![FieldSpec { name: "value", kind: ValueKind::Int, doc: "unused" }]))
    }

    fn message_schema(&self) -> &Schema {
        self.state_schema()
    }

    fn init(&self, _agent: &AgentView<'_>) -> Result<VertexState, RuleError> {
        Ok(Record::new().with("value", Value::Int(0)))
    }

    fn send(&self, agent: &AgentView<'_>, _state: &VertexState) -> Result<Outgoing, RuleError> {
        let stranger = (0..agent.node_count as NodeId).find(|v| *v != agent.id && !agent.is_neighbor(*v));
        Ok(stranger.map(|v| (v, Record::new().with("value", Value::Int(1)))).into_iter().collect())
    }

    fn update(
        &self,
        _agent: &AgentView<'_>,
        state: &VertexState,
        _inbox: &[Envelope],
    ) -> Result<VertexState, RuleError> {
        Ok(state.clone())
    }

    fn template(&self) -> Template {
        Template {
            name: "rogue",
            summary: "Misbehaving program.",
            state: self.state_schema().clone(),
            message: self.message_schema().clone(),
            initialization: vec![],
            send: vec![],
            update: vec![],
            termination: vec![],
        }
    }
}

fn values(engine: &Engine<'_>) -> Vec<i64> {
    engine.states().iter().map(|(_, s)| s.int("value").expect("value field")).collect()
}

/// States after round `r` depend only on states after round `r - 1`, and each
/// round consumes exactly the messages sent in the previous round.
pub fn barrier_isolation(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let directed = rng.gen_bool(0.5);
    let g = random_graph(&mut rng, 12, directed, false);
    let program = Accumulate::new();
    let rounds = rng.gen_range(1..6);
    let schedule = if rng.gen_bool(0.5) { Schedule::Permuted(seed) } else { Schedule::Parallel };
    let mut engine = Engine::new(&g, &program, &DeterministicBackend, cfg(schedule)).map_err(|e| e.to_string())?;
    engine.initialize().map_err(|e| e.to_string())?;

    let mut expected: Vec<i64> = g.node_ids().iter().map(|v| Accumulate::initial(*v)).collect();
    for r in 1..=rounds {
        for env in engine.pending() {
            if env.sent_round != r - 1 {
                return Err(format!("round {r}: pending message from round {}", env.sent_round));
            }
        }
        engine.superstep().map_err(|e| e.to_string())?;
        let prev = expected.clone();
        for (i, v) in g.node_ids().iter().enumerate() {
            let mut inbox: Vec<(NodeId, i64)> =
                g.in_neighbors(*v).map_err(|e| e.to_string())?.iter().map(|nb| (nb.id, prev[nb.id as usize])).collect();
            inbox.sort_by_key(|(s, _)| *s);
            expected[i] = Accumulate::step(prev[i], &inbox);
        }
        let got = values(&engine);
        if got != expected {
            return Err(format!("round {r}: states {got:?}, synchronous oracle {expected:?}"));
        }
    }

    let result = engine.run().map_err(|e| e.to_string())?;
    let trace = result.trace.ok_or("trace missing")?;
    for pair in trace.rounds.windows(2) {
        let (before, after) = (&pair[0], &pair[1]);
        if after.consumed.iter().any(|e| e.sent_round != before.round) {
            return Err(format!("round {} consumed a message not sent in round {}", after.round, before.round));
        }
        let mut sent = before.sent.clone();
        let mut consumed = after.consumed.clone();
        let key = |e: &Envelope| (e.recipient, e.sender);
        sent.sort_by_key(key);
        consumed.sort_by_key(key);
        if sent != consumed {
            return Err(format!(
                "round {}: consumed messages differ from those sent in round {}",
                after.round, before.round
            ));
        }
    }
    Ok(())
}

/// Sequential, seeded-permutation and parallel schedules give identical runs.
pub fn schedule_determinism(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let directed = rng.gen_bool(0.5);
    let weighted = rng.gen_bool(0.5);
    let g = random_graph(&mut rng, 10, directed, weighted);
    for p in library_programs(&mut rng, &g) {
        let base = run_with(&g, p.as_ref(), cfg(Schedule::Sequential))?;
        for schedule in [Schedule::Permuted(seed), Schedule::Parallel] {
            let other = run_with(&g, p.as_ref(), cfg(schedule))?;
            if other != base {
                return Err(format!("{}: {schedule:?} differs from sequential", p.name()));
            }
        }
    }
    Ok(())
}

/// Once a run is quiescent, further supersteps neither move a state beyond
/// the change tolerance nor alter the result of a run with a larger cap.
pub fn early_termination_idempotence(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let directed = rng.gen_bool(0.5);
    let weighted = rng.gen_bool(0.5);
    let g = random_graph(&mut rng, 10, directed, weighted);
    for p in library_programs(&mut rng, &g) {
        let n = g.node_count();
        let cap = 4 * n + 8;
        let base = run_with(&g, p.as_ref(), EngineConfig::default().with_max_supersteps(cap))?;
        if base.termination != Termination::Converged {
            continue;
        }
        let longer = run_with(&g, p.as_ref(), EngineConfig::default().with_max_supersteps(cap + 5))?;
        if longer != base {
            return Err(format!("{}: a larger cap changed a converged run", p.name()));
        }
        let mut engine =
            Engine::new(&g, p.as_ref(), &DeterministicBackend, EngineConfig::default()).map_err(|e| e.to_string())?;
        engine.initialize().map_err(|e| e.to_string())?;
        while engine.superstep().map_err(|e| e.to_string())? {
            if engine.round() > cap {
                return Err(format!("{}: manual stepping did not converge", p.name()));
            }
        }
        let snapshot: Vec<VertexState> = engine.states().iter().map(|(_, s)| s.clone()).collect();
        let final_states: Vec<VertexState> = base.final_states.values().cloned().collect();
        if snapshot != final_states {
            return Err(format!("{}: manual stepping ended in different states", p.name()));
        }
        for extra in 1..=3 {
            if engine.superstep().map_err(|e| e.to_string())? {
                return Err(format!("{}: superstep {extra} after quiescence reported a change", p.name()));
            }
            let now: Vec<VertexState> = engine.states().iter().map(|(_, s)| s.clone()).collect();
            if !now.iter().zip(&snapshot).all(|(a, b)| a.approx_eq(b, FLOAT_CHANGE_TOLERANCE)) {
                return Err(format!("{}: superstep {extra} after quiescence changed a state", p.name()));
            }
        }
    }
    Ok(())
}

/// Every message travels along an edge of the graph the program runs on, and
/// a program addressing a non-neighbor is rejected.
pub fn message_locality(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let directed = rng.gen_bool(0.5);
    let weighted = rng.gen_bool(0.5);
    let g = random_graph(&mut rng, 10, directed, weighted);
    for p in library_programs(&mut rng, &g) {
        let engine =
            Engine::new(&g, p.as_ref(), &DeterministicBackend, cfg(Schedule::Sequential)).map_err(|e| e.to_string())?;
        let view = engine.graph().clone();
        let result = engine.run().map_err(|e| e.to_string())?;
        for round in &result.trace.ok_or("trace missing")?.rounds {
            for env in round.sent.iter().chain(&round.consumed) {
                let adjacent =
                    view.neighbors(env.sender).map_err(|e| e.to_string())?.iter().any(|nb| nb.id == env.recipient);
                if !adjacent {
                    return Err(format!("{}: message {} -> {} crosses no edge", p.name(), env.sender, env.recipient));
                }
            }
        }
    }
    let complete = (0..g.node_count() as NodeId).all(|u| {
        (0..g.node_count() as NodeId).all(|v| u == v || g.neighbors(u).is_ok_and(|nb| nb.iter().any(|x| x.id == v)))
    });
    match agentgraph::run(&g, &Rogue, &DeterministicBackend, EngineConfig::default()) {
        Err(RunError::SchemaViolation { .. }) => Ok(()),
        Ok(_) if complete => Ok(()),
        Ok(_) => Err("a message to a non-neighbor was delivered".into()),
        Err(e) => Err(format!("unexpected error for a non-neighbor message: {e}")),
    }
}

fn distances(engine: &Engine<'_>) -> Result<Vec<Option<i64>>, String> {
    engine
        .states()
        .iter()
        .map(|(v, s)| match s.value("distance").map_err(|e| e.to_string())? {
            Value::Unreachable => Ok(None),
            Value::Int(d) => Ok(Some(*d)),
            other => Err(format!("node {v}: distance {other}")),
        })
        .collect()
}

/// After `k` supersteps every shortest-path distance is the minimum over
/// paths of at most `k` edges, and the run ends within `n + 1` supersteps.
pub fn bellman_ford_bound(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let directed = rng.gen_bool(0.5);
    let g = random_graph(&mut rng, 14, directed, true);
    let n = g.node_count();
    let source = rng.gen_range(0..n);
    let adj = adjacency::<i64>(&g).ok_or("integer weights expected")?;
    let program = ShortestPath::new(source as NodeId);
    let mut engine =
        Engine::new(&g, &program, &DeterministicBackend, EngineConfig::default()).map_err(|e| e.to_string())?;
    engine.initialize().map_err(|e| e.to_string())?;
    let mut k = 0;
    loop {
        let want = bellman_ford_truncated(&adj, source, k);
        let got = distances(&engine)?;
        if got != want {
            return Err(format!("after {k} supersteps: {got:?}, at most {k} edges: {want:?}"));
        }
        if k > n + 1 {
            return Err(format!("still changing after {k} supersteps on {n} nodes"));
        }
        k += 1;
        if !engine.superstep().map_err(|e| e.to_string())? {
            break;
        }
    }
    let got = distances(&engine)?;
    if got != dijkstra(&adj, source) {
        return Err(format!("final distances {got:?} differ from dijkstra"));
    }
    Ok(())
}

pub type Property = fn(u64) -> Result<(), String>;

pub const PROPERTIES: [(&str, Property); 5] = [
    ("barrier isolation", barrier_isolation),
    ("scheduling-permutation determinism", schedule_determinism),
    ("early-termination idempotence", early_termination_idempotence),
    ("message locality", message_locality),
    ("bellman-ford per-round bound", bellman_ford_bound),
];

/// Runs `trials` seeds of one property, stopping at the first violation.
pub fn check_property(prop: Property, trials: u64) -> Result<(), String> {
    (0..trials).try_for_each(|seed| prop(seed).map_err(|e| format!("seed {seed}: {e}")))
}

fn ranks(engine: &Engine<'_>) -> Result<Vec<f64>, String> {
    engine.states().iter().map(|(_, s)| s.float("rank").map_err(|e| e.to_string())).collect()
}

/// Random digraph on exactly `n` nodes (dangling nodes and self loops allowed).
pub fn random_digraph(rng: &mut ChaCha8Rng, n: usize) -> Graph {
    let p = rng.gen_range(0.02..0.4);
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in 0..n as NodeId {
            if rng.gen_bool(p) {
                edges.push(Edge::new(u, v));
            }
        }
    }
    Graph::new(0..n as NodeId, edges, true, false).expect("generated digraph is valid")
}

/// Ranks sum to one after initialization and after every superstep.
pub fn pagerank_mass(seed: u64) -> Result<(), String> {
    let mut rng = rng(seed);
    let n = rng.gen_range(1..=20);
    let g = random_digraph(&mut rng, n);
    let program = PageRank::default();
    let mut engine =
        Engine::new(&g, &program, &DeterministicBackend, EngineConfig::default()).map_err(|e| e.to_string())?;
    engine.initialize().map_err(|e| e.to_string())?;
    loop {
        let total: f64 = ranks(&engine)?.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(format!("round {}: ranks sum to {total}", engine.round()));
        }
        if engine.round() >= engine.max_supersteps() || !engine.superstep().map_err(|e| e.to_string())? {
            return Ok(());
        }
    }
}

/// Complete digraph on four nodes: every rank is 1/4.
pub fn pagerank_k4() -> Result<(), String> {
    let edges = (0..4).flat_map(|u| (0..4).filter(move |v| *v != u).map(move |v| Edge::new(u, v)));
    let g = Graph::new(0..4, edges, true, false).map_err(|e| e.to_string())?;
    let result = run_with(&g, &PageRank::default(), EngineConfig::default())?;
    for (v, s) in &result.final_states {
        let r = s.float("rank").map_err(|e| e.to_string())?;
        if (r - 0.25).abs() > 1e-12 {
            return Err(format!("node {v} has rank {r}"));
        }
    }
    Ok(())
}

/// A 20-node random digraph run to a tight tolerance matches power iteration.
pub fn pagerank_oracle(seed: u64) -> Result<f64, String> {
    let mut rng = rng(seed);
    let g = random_digraph(&mut rng, 20);
    let program = PageRank::new(0.85, 1e-14).with_max_iterations(5_000);
    let result = run_with(&g, &program, EngineConfig::default())?;
    let want = agentgraph::eval::oracle::pagerank(&g, 0.85, 1e-15, 100_000);
    let mut worst = 0.0f64;
    for ((v, s), w) in result.final_states.iter().zip(&want) {
        let r = s.float("rank").map_err(|e| e.to_string())?;
        worst = worst.max((r - w).abs());
        if (r - w).abs() > 1e-8 {
            return Err(format!("node {v}: {r} vs oracle {w}"));
        }
    }
    Ok(worst)
}

/// Heuristic and exact answers on the appendix Hamilton graph. The heuristic
/// must say No; the exact search may disagree, which is reported, not failed.
pub fn hamilton_discrepancy() -> Result<String, String> {
    let (sol, _) = solve_traced(APPENDIX_HAM, &DeterministicBackend).map_err(|e| e.to_string())?;
    if sol.answer.value != agentgraph::orchestrator::AnswerValue::Boolean(false) {
        return Err(format!("heuristic answered {}", sol.answer.narrative));
    }
    let spec = classify_problem(APPENDIX_HAM).map_err(|e| e.to_string())?;
    let g = spec.parse_graph().map_err(|e| e.to_string())?;
    let exact = agentgraph::eval::oracle::hamiltonian_path(&g, agentgraph::eval::oracle::HAMILTON_BUDGET)
        .map_err(|e| e.to_string())?;
    Ok(match exact {
        Some(path) => {
            let valid = path.len() == g.node_count()
                && path.windows(2).all(|w| g.neighbors(w[0]).is_ok_and(|nb| nb.iter().any(|x| x.id == w[1])));
            if !valid {
                return Err(format!("oracle returned an invalid path {path:?}"));
            }
            format!("heuristic No, oracle Yes via {path:?}: disagreement recorded")
        }
        None => "heuristic No, oracle No: agree".to_string(),
    })
}
