//! Accuracy harness: generate, solve through the orchestrator, score.

use std::collections::BTreeMap;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::generate::{generate_instance, generate_instance_unbounded, InstanceSpec};
use super::oracle::is_topological_order;
use crate::backend::AgentBackend;
use crate::graph::Graph;
use crate::number::Number;
use crate::orchestrator::{solve, AnswerValue, TaskKind};
use crate::runtime::EngineConfig;

/// Per-node tolerance when comparing PageRank values.
pub const RANK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub count: usize,
    pub sizes: Vec<usize>,
    pub base_seed: u64,
    /// Worker threads; 0 means one per core.
    pub workers: usize,
    /// Skip the per-task node range check.
    pub unbounded: bool,
}

impl SuiteConfig {
    pub fn new(count: usize, sizes: Vec<usize>) -> Self {
        SuiteConfig { count, sizes, base_seed: 0, workers: 0, unbounded: false }
    }
}

/// One scored instance; also the CSV row layout.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseRow {
    pub task: TaskKind,
    pub size: usize,
    pub seed: u64,
    pub expected: String,
    pub got: String,
    pub correct: bool,
    pub supersteps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeBucket {
    pub size: usize,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub size: usize,
    pub seed: u64,
    pub expected: String,
    pub got: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub task: TaskKind,
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub per_size: Vec<SizeBucket>,
    pub failures: Vec<Failure>,
    #[serde(skip)]
    pub rows: Vec<CaseRow>,
}

fn ratio(correct: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        correct as f64 / total as f64
    }
}

impl SuiteReport {
    /// Aggregates rows; the result does not depend on row order.
    pub fn from_rows(task: TaskKind, mut rows: Vec<CaseRow>) -> Self {
        rows.sort_by_key(|r| (r.size, r.seed));
        let mut buckets: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
        for r in &rows {
            let b = buckets.entry(r.size).or_default();
            b.0 += 1;
            b.1 += usize::from(r.correct);
        }
        let per_size = buckets
            .into_iter()
            .map(|(size, (total, correct))| SizeBucket { size, total, correct, accuracy: ratio(correct, total) })
            .collect();
        let failures = rows
            .iter()
            .filter(|r| !r.correct)
            .map(|r| Failure { size: r.size, seed: r.seed, expected: r.expected.clone(), got: r.got.clone() })
            .collect();
        let total = rows.len();
        let correct = rows.iter().filter(|r| r.correct).count();
        SuiteReport { task, total, correct, accuracy: ratio(correct, total), per_size, failures, rows }
    }
}

/// Compares a solver answer with the oracle. Orders are checked with the
/// verifier, ranks within [`RANK_TOLERANCE`], everything else exactly.
pub fn score(task: TaskKind, graph: &Graph, expected: &AnswerValue, got: &AnswerValue) -> bool {
    match (task, expected, got) {
        (TaskKind::TopoSort, _, AnswerValue::Ordering(order)) => is_topological_order(graph, order),
        (TaskKind::PageRank, AnswerValue::Ranking(want), AnswerValue::Ranking(have)) => {
            let mut want = want.clone();
            let mut have = have.clone();
            want.sort_by_key(|(v, _)| *v);
            have.sort_by_key(|(v, _)| *v);
            want.len() == have.len()
                && want.iter().zip(&have).all(|((a, x), (b, y))| a == b && (x - y).abs() <= RANK_TOLERANCE)
        }
        (_, AnswerValue::Number(a), AnswerValue::Number(b)) => numbers_match(*a, *b),
        (_, AnswerValue::DistanceMap(a), AnswerValue::DistanceMap(b)) => {
            a.len() == b.len()
                && a.iter().zip(b).all(|((u, x), (v, y))| {
                    u == v
                        && match (x, y) {
                            (Some(x), Some(y)) => numbers_match(*x, *y),
                            (None, None) => true,
                            _ => false,
                        }
                })
        }
        _ => expected == got,
    }
}

fn numbers_match(a: Number, b: Number) -> bool {
    match (a, b) {
        (Number::Int(x), Number::Int(y)) => x == y,
        _ => a.approx_eq(b, 1e-9),
    }
}

/// Generates, solves and scores one instance; errors become incorrect rows.
pub fn run_case(inst: &InstanceSpec, backend: &dyn AgentBackend, cfg: &EngineConfig) -> CaseRow {
    let expected = inst.oracle_answer.to_string();
    let (got, correct, supersteps) = match solve(&inst.rendered_text, backend, cfg) {
        Ok(sol) => {
            let ok = score(inst.task, &inst.graph, &inst.oracle_answer, &sol.answer.value);
            (sol.answer.value.to_string(), ok, sol.supersteps)
        }
        Err(e) => (format!("error: {e}"), false, 0),
    };
    CaseRow { task: inst.task, size: inst.size, seed: inst.seed, expected, got, correct, supersteps }
}

/// Size and seed of the `i`-th instance: sizes cycle, seeds count up.
pub fn case_key(cfg: &SuiteConfig, i: usize) -> (usize, u64) {
    (cfg.sizes[i % cfg.sizes.len()], cfg.base_seed + i as u64)
}

/// Runs `cfg.count` instances spread over `cfg.sizes`. Never aborts: failures
/// (including generation errors) are recorded as incorrect rows.
pub fn run_suite(task: TaskKind, cfg: &SuiteConfig, backend: &dyn AgentBackend, engine: &EngineConfig) -> SuiteReport {
    if cfg.count == 0 || cfg.sizes.is_empty() {
        return SuiteReport::from_rows(task, Vec::new());
    }
    let one = |i: usize| {
        let (size, seed) = case_key(cfg, i);
        let inst = if cfg.unbounded {
            generate_instance_unbounded(task, size, seed)
        } else {
            generate_instance(task, size, seed)
        };
        match inst {
            Ok(inst) => run_case(&inst, backend, engine),
            Err(e) => CaseRow {
                task,
                size,
                seed,
                expected: format!("error: {e}"),
                got: String::new(),
                correct: false,
                supersteps: 0,
            },
        }
    };
    let rows: Vec<CaseRow> = match rayon::ThreadPoolBuilder::new().num_threads(cfg.workers).build() {
        Ok(pool) => pool.install(|| (0..cfg.count).into_par_iter().map(one).collect()),
        Err(e) => {
            log::warn!("falling back to sequential suite: {e}");
            (0..cfg.count).map(one).collect()
        }
    };
    SuiteReport::from_rows(task, rows)
}

/// Writes `task,size,seed,expected,got,correct,supersteps` rows for every report.
pub fn write_csv<W: Write>(reports: &[SuiteReport], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for r in reports {
        for row in &r.rows {
            w.serialize(row)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes `task,size,total,correct,accuracy`: one accuracy-vs-size row per bucket.
pub fn write_size_csv<W: Write>(reports: &[SuiteReport], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["task", "size", "total", "correct", "accuracy"])?;
    for r in reports {
        for b in &r.per_size {
            w.serialize((r.task, b.size, b.total, b.correct, b.accuracy))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Sizes spread evenly over `[lo, hi]`, at most `buckets` of them.
pub fn spread_sizes(lo: usize, hi: usize, buckets: usize) -> Vec<usize> {
    if buckets <= 1 || lo >= hi {
        return vec![lo];
    }
    let mut out: Vec<usize> = (0..buckets).map(|i| lo + (hi - lo) * i / (buckets - 1)).collect();
    out.dedup();
    out
}
