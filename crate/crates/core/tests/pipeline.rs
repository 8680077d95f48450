mod common;

use agentgraph::eval::suite::spread_sizes;
use agentgraph::eval::{generate_instance, node_range, oracle_solve, run_suite, SuiteConfig};
use agentgraph::orchestrator::{parse_narrative, AnswerValue};
use agentgraph::{solve, DeterministicBackend, EngineConfig, Number, TaskKind};
use common::*;

#[test]
fn appendix_shortest_path_golden() {
    let (sol, run) = solve_traced(APPENDIX_SP, &DeterministicBackend).unwrap();
    assert_eq!(run.render_states(&agentgraph::programs::ShortestPath::new(1)), APPENDIX_SP_BLOCK);
    let want: Vec<_> = APPENDIX_SP_DISTANCES.iter().map(|(v, d)| (*v, Some(Number::Int(*d)))).collect();
    assert_eq!(sol.answer.value, AnswerValue::DistanceMap(want));
    assert_eq!(parse_narrative(sol.answer.kind, &sol.answer.narrative).unwrap(), sol.answer.value);
    let rendered = run.trace.as_ref().unwrap().render(&agentgraph::programs::ShortestPath::new(1), run.termination);
    assert!(rendered.contains("Node 1 Send Message to Node 7: 1. new_distance: 1"), "{rendered}");
    assert!(rendered.contains("Node 3 Send Message to Node 5: 1. new_distance: \\infinity"));
}

#[test]
fn every_task_matches_its_oracle() {
    for task in TaskKind::ALL {
        let (lo, hi) = node_range(task);
        let mut cfg = SuiteConfig::new(24, spread_sizes(lo, hi.min(30), 4));
        cfg.base_seed = 500;
        if task == TaskKind::HamiltonHeuristic {
            // The heuristic is not exact; only check that every case runs.
            let r = run_suite(task, &cfg, &DeterministicBackend, &EngineConfig::default());
            assert!(r.rows.iter().all(|row| !row.got.starts_with("error")), "{:?}", r.failures);
            continue;
        }
        let r = run_suite(task, &cfg, &DeterministicBackend, &EngineConfig::default());
        assert_eq!(r.correct, r.total, "{task}: {:?}", r.failures);
    }
}

#[test]
fn rendered_instances_solve_to_the_stored_oracle_answer() {
    for task in [TaskKind::Connectivity, TaskKind::MaxFlow, TaskKind::TriangleSum] {
        let inst = generate_instance(task, 12, 3).unwrap();
        assert_eq!(oracle_solve(task, &inst.graph, &inst.params).unwrap(), inst.oracle_answer);
        let sol = solve(&inst.rendered_text, &DeterministicBackend, &EngineConfig::default()).unwrap();
        assert_eq!(sol.task, task);
    }
}

#[test]
fn pagerank_mass_is_conserved() {
    for seed in 0..20 {
        pagerank_mass(seed).unwrap();
    }
}

#[test]
fn pagerank_complete_graph_is_uniform() {
    pagerank_k4().unwrap();
}

#[test]
fn pagerank_matches_power_iteration() {
    for seed in 0..5 {
        pagerank_oracle(seed).unwrap();
    }
}

#[test]
fn hamilton_heuristic_says_no_on_appendix_graph() {
    let note = hamilton_discrepancy().unwrap();
    assert!(note.starts_with("heuristic No"), "{note}");
    let sol = solve(APPENDIX_HAM, &DeterministicBackend, &EngineConfig::default()).unwrap();
    assert!(sol.answer.narrative.contains("maximum path length found is 5"), "{}", sol.answer.narrative);
}

#[test]
fn off_domain_text_is_rejected_at_classification() {
    let err = solve("What is the capital of France?", &DeterministicBackend, &EngineConfig::default()).unwrap_err();
    assert!(err.to_string().starts_with("classify:"), "{err}");
}

#[test]
fn three_node_path_oracle_yes_heuristic_no() {
    let text = "The nodes are numbered from 0 to 2, and the edges are: (0,1) (1,2). Is there a Hamiltonian path in this graph?";
    let spec = agentgraph::classify_problem(text).unwrap();
    let g = spec.parse_graph().unwrap();
    let exact = agentgraph::eval::oracle::hamiltonian_path(&g, 1_000).unwrap();
    assert!(exact == Some(vec![0, 1, 2]) || exact == Some(vec![2, 1, 0]), "{exact:?}");
    let sol = solve(text, &DeterministicBackend, &EngineConfig::default()).unwrap();
    assert_eq!(sol.answer.value, AnswerValue::Boolean(false));
}
