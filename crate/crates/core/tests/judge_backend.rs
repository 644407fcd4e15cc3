//! The remote backend against an in-process fake judge.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::routing::{get, post};
use axum::{Json, Router};
use serde_json::{json, Value};
use tutor_core::executor::{
    ExecutionError, ExecutionRequest, JudgeBackend, Overall, SandboxBackend, TestStatus,
};

#[derive(Clone)]
struct Fake {
    /// Final status id and stdout served after one "Processing" poll.
    outcome: (u32, &'static str),
    polls: Arc<AtomicUsize>,
    submitted: Arc<Mutex<Option<Value>>>,
}

async fn submit(State(f): State<Fake>, Json(body): Json<Value>) -> (StatusCode, Json<Value>) {
    *f.submitted.lock().unwrap() = Some(body);
    (StatusCode::CREATED, Json(json!({"token": "tok-1"})))
}

async fn fetch(State(f): State<Fake>, Path(token): Path<String>) -> Json<Value> {
    assert_eq!(token, "tok-1");
    if f.polls.fetch_add(1, Ordering::SeqCst) == 0 {
        return Json(json!({"stdout": null, "stderr": null, "status": {"id": 2, "description": "Processing"}}));
    }
    Json(json!({
        "stdout": f.outcome.1,
        "stderr": "trace",
        "compile_output": null,
        "status": {"id": f.outcome.0, "description": "x"}
    }))
}

async fn serve(outcome: (u32, &'static str)) -> (String, Fake) {
    let fake = Fake {
        outcome,
        polls: Arc::default(),
        submitted: Arc::default(),
    };
    let app = Router::new()
        .route("/submissions", post(submit))
        .route("/submissions/{token}", get(fetch))
        .with_state(fake.clone());
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let addr = listener.local_addr().unwrap();
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    (format!("http://{addr}"), fake)
}

fn request() -> ExecutionRequest {
    ExecutionRequest {
        source_code: "print('hi')".into(),
        language_tag: "python3".into(),
        time_limit_ms: 1500,
        memory_limit_kb: 65536,
        declared_tests: 2,
    }
}

fn backend(url: &str) -> JudgeBackend {
    let mut b = JudgeBackend::new(url);
    b.poll_interval = std::time::Duration::from_millis(10);
    b
}

#[tokio::test]
async fn submission_wire_format_and_markers() {
    let (url, fake) = serve((3, "SCRIPT-TEST 1 PASS\nSCRIPT-TEST 2 FAIL\n")).await;
    let r = backend(&url).run(&request()).await.unwrap();
    assert_eq!(r.overall, Overall::Rejected);
    assert_eq!(
        r.verdicts.iter().map(|v| v.status).collect::<Vec<_>>(),
        [TestStatus::Pass, TestStatus::Fail]
    );
    assert_eq!(fake.polls.load(Ordering::SeqCst), 2);
    let body = fake.submitted.lock().unwrap().clone().unwrap();
    assert_eq!(
        body,
        json!({"source_code": "print('hi')", "language_id": 71, "cpu_time_limit": 1.5, "memory_limit": 65536})
    );
}

#[tokio::test]
async fn status_mapping() {
    let cases = [
        (3, "SCRIPT-TEST 1 PASS\nSCRIPT-TEST 2 PASS", Overall::Accepted),
        (5, "SCRIPT-TEST 1 PASS", Overall::Timeout),
        (11, "", Overall::RuntimeError),
        (6, "", Overall::RuntimeError),
        (13, "", Overall::SandboxError),
        (14, "SCRIPT-TEST 1 PASS\nSCRIPT-TEST 2 PASS", Overall::SandboxError),
    ];
    for (status, stdout, expected) in cases {
        let (url, _) = serve((status, stdout)).await;
        let r = backend(&url).run(&request()).await.unwrap();
        assert_eq!(r.overall, expected, "status {status}");
    }
}

#[tokio::test]
async fn unreachable_judge_is_sandbox_unavailable() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    assert!(matches!(
        backend(&url).run(&request()).await,
        Err(ExecutionError::SandboxUnavailable(_))
    ));
}
