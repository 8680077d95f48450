mod common;

use std::fs;

use agentgraph::BackendMode;
use common::*;

/// Rewrites the committed transcript. Run with `--ignored` after changing prompts.
#[test]
#[ignore]
fn regenerate_fixture() {
    let dir = replay_fixture_dir();
    if dir.exists() {
        fs::remove_dir_all(&dir).unwrap();
    }
    record_appendix(&dir).unwrap();
}

#[test]
fn fixture_is_current() {
    let tmp = tempfile::tempdir().unwrap();
    record_appendix(tmp.path()).unwrap();
    let listing = |d: &std::path::Path| {
        let mut v: Vec<_> = fs::read_dir(d)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name(), fs::read_to_string(e.path()).unwrap())
            })
            .collect();
        v.sort();
        v
    };
    let fresh = listing(tmp.path());
    let committed = listing(&replay_fixture_dir());
    assert_eq!(fresh.len(), committed.len());
    assert!(fresh == committed, "prompts changed; regenerate the fixture with --ignored");
}

#[test]
fn replay_is_bit_exact() {
    let run = replay_matches_deterministic().unwrap();
    assert_eq!(run.trace.unwrap().rounds.len(), run.supersteps_executed + 1);
}

#[test]
fn replay_backend_reports_mode() {
    let b = replay_backend(replay_fixture_dir()).unwrap();
    assert_eq!(b.mode(), BackendMode::Replay);
}

#[test]
fn changed_problem_misses() {
    let b = replay_backend(replay_fixture_dir()).unwrap();
    let text = APPENDIX_SP.replace("(3,6,1)", "(3,6,2)");
    let err = solve_traced(&text, b.as_ref()).unwrap_err().to_string();
    assert!(err.starts_with("run:"), "{err}");
    assert!(err.contains("no recorded exchange"), "{err}");
}

#[test]
fn edited_reply_surfaces_as_miss() {
    // Node 3's state appears in its next Send prompt, so an edited Update
    // reply makes the following request differ from the recording.
    let tmp = tempfile::tempdir().unwrap();
    let mut edited = 0;
    for e in fs::read_dir(replay_fixture_dir()).unwrap() {
        let e = e.unwrap();
        let mut json: serde_json::Value = serde_json::from_str(&fs::read_to_string(e.path()).unwrap()).unwrap();
        let reply = json["reply"].as_str().unwrap().to_string();
        if json["key"]["node"] == 3 && json["key"]["phase"] == "Update" && reply.contains("distance: 14") {
            json["reply"] = reply.replace("distance: 14", "distance: 15").into();
            edited += 1;
        }
        fs::write(tmp.path().join(e.file_name()), serde_json::to_string_pretty(&json).unwrap()).unwrap();
    }
    assert!(edited > 0);
    let b = replay_backend(tmp.path().to_path_buf()).unwrap();
    let err = solve_traced(APPENDIX_SP, b.as_ref()).unwrap_err().to_string();
    assert!(err.contains("prompt differs"), "{err}");
}
