//! Concurrent requests from one learner behave as if applied one at a time.

mod common;

use std::collections::BTreeSet;

use common::*;
use futures::future::join_all;
use reqwest::StatusCode;
use serde_json::json;
use tutor_core::learner::bkt_filter;
use tutor_core::telemetry::ResearchStore;

/// Every ordering of `ones` true and `zeros` false values.
fn orderings(ones: usize, zeros: usize) -> Vec<Vec<bool>> {
    if ones + zeros == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    if ones > 0 {
        for mut rest in orderings(ones - 1, zeros) {
            rest.insert(0, true);
            out.push(rest);
        }
    }
    if zeros > 0 {
        for mut rest in orderings(ones, zeros - 1) {
            rest.insert(0, false);
            out.push(rest);
        }
    }
    out
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn concurrent_submits_are_linearizable() {
    let h = start().await;
    let l = h.learner("sandpiper").await;
    let starter = h.get("/tasks/dice", Some(&l.token)).await.1["starter_code"].as_str().unwrap().to_string();
    let right = solution("dice");
    let codes: Vec<&str> = (0..8).map(|i| if i % 2 == 0 { right.as_str() } else { starter.as_str() }).collect();
    let responses = join_all(codes.iter().map(|c| h.submit(&l, "dice", c))).await;
    let mut correct = 0;
    for (status, body) in &responses {
        assert_eq!(*status, StatusCode::OK, "{body}");
        if body["result"]["overall"] == "Accepted" {
            correct += 1;
        }
    }
    assert_eq!(correct, 4);

    let course = h.state.course(COURSE).unwrap();
    let task = course.task("dice").unwrap();
    let (_, body) = h.get("/me/mastery", Some(&l.token)).await;
    for kc in body["kcs"].as_array().unwrap() {
        assert_eq!(kc["successes"], 4);
        assert_eq!(kc["failures"], 4);
        let kc_id = kc["kc_id"].as_str().unwrap();
        assert!(task.kc_ids.iter().any(|k| k == kc_id));
        let got = kc["mastery"].as_f64().unwrap();
        let params = course.bkt_params(kc_id);
        let reachable: BTreeSet<u64> = orderings(4, 4)
            .iter()
            .map(|o| bkt_filter(&params, o).unwrap().last().copied().unwrap().to_bits())
            .collect();
        assert!(
            orderings(4, 4).iter().any(|o| (bkt_filter(&params, o).unwrap().last().unwrap() - got).abs() < 1e-12),
            "{got} is not the result of any serial order ({} candidates)",
            reachable.len()
        );
    }
}

#[tokio::test(flavor = "multi_thread", worker_threads = 4)]
async fn batches_racing_consent_changes_are_all_or_nothing() {
    let h = start().await;
    let l = h.learner("stilt_bird").await;
    let batch = |n: i64| {
        json!({"events": (0..5).map(|k| json!({
            "user_id": l.user_id, "session_id": "race", "task_id": "bayes",
            "at_ms": n * 10 + k, "kind": "cursor_move", "payload": {"offset": k}
        })).collect::<Vec<_>>()})
    };
    let batches = join_all((0..20).map(|n| h.post("/telemetry/batch", Some(&l.token), batch(n))));
    let toggles = join_all((0..10).map(|i| h.post("/consent", Some(&l.token), json!({"research_consent": i % 2 == 0}))));
    let (batches, _) = tokio::join!(batches, toggles);
    let mut accepted = 0;
    for (status, body) in batches {
        assert_eq!(status, StatusCode::OK);
        let n = body["accepted"].as_u64().unwrap();
        assert!(n == 0 || n == 5);
        accepted += n as usize;
    }
    assert_eq!(h.research.all_events().unwrap().len(), accepted);
}
