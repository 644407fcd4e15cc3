//! HTTP behaviour of the learner and operator routes.

mod common;

use std::sync::Arc;

use common::*;
use reqwest::{Method, StatusCode};
use serde_json::json;
use tutor_core::archive::read_entries;
use tutor_core::executor::JudgeBackend;

#[tokio::test]
async fn health() {
    let h = start().await;
    let (status, body) = h.get("/health", None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["status"], "ok");
}

#[tokio::test]
async fn registration_rules() {
    let h = start().await;
    assert_eq!(h.register("heron_7").await.0, StatusCode::CREATED);
    let (status, body) = h.register("heron_7").await;
    assert_eq!((status, body["code"].as_str()), (StatusCode::CONFLICT, Some("UsernameTaken")));
    let (_, body) = h.register("ann@example.org").await;
    assert_eq!(body["code"], "EmailLikeUsername");
    for bad in ["ab", "u12", "s3", "UPPER", "1234", "has space"] {
        let (status, _) = h.register(bad).await;
        assert_eq!(status, StatusCode::BAD_REQUEST, "{bad}");
    }
    let (status, _) = h.post("/register", None, json!({"username": "shortpw", "password": "abc"})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
}

#[tokio::test]
async fn login_and_session() {
    let h = start().await;
    let l = h.learner("kestrel").await;
    assert_eq!(l.token.len(), 43);
    let (status, body) = h.login("kestrel", "wrong password").await;
    assert_eq!((status, body["code"].as_str()), (StatusCode::UNAUTHORIZED, Some("InvalidCredentials")));
    let (status, body2) = h.login("nobody_here", PASSWORD).await;
    assert_eq!(status, StatusCode::UNAUTHORIZED);
    assert_eq!(body, body2);
    assert_eq!(h.get("/me/mastery", None).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(h.get("/me/mastery", Some("x".repeat(43).as_str())).await.0, StatusCode::UNAUTHORIZED);
    assert_eq!(h.get("/me/mastery", Some(&l.token)).await.0, StatusCode::OK);
}

#[tokio::test]
async fn tasks_hide_the_test_script() {
    let h = start().await;
    let l = h.learner("plover").await;
    let (status, body) = h.get(&format!("/courses/{COURSE}/next-task"), Some(&l.token)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["policy"], "fixed_curriculum");
    assert_eq!(body["task"]["task_id"], "bayes");
    assert!(body["task"].get("test_script").is_none());
    assert!(!body.to_string().contains("SCRIPT-TEST"));
    let (status, body) = h.get("/courses/nope/next-task", Some(&l.token)).await;
    assert_eq!((status, body["code"].as_str()), (StatusCode::NOT_FOUND, Some("CourseNotFound")));
    let (status, body) = h.get("/tasks/nope", Some(&l.token)).await;
    assert_eq!((status, body["code"].as_str()), (StatusCode::NOT_FOUND, Some("TaskNotFound")));
}

#[tokio::test]
async fn submit_updates_mastery_and_progress() {
    let h = start().await;
    let l = h.learner("godwit").await;
    let starter = h.get("/tasks/bayes", Some(&l.token)).await.1["starter_code"].as_str().unwrap().to_string();
    let (status, wrong) = h.submit(&l, "bayes", &starter).await;
    assert_eq!(status, StatusCode::OK, "{wrong}");
    assert_ne!(wrong["result"]["overall"], "Accepted");
    assert_eq!(wrong["task_completed"], false);
    let after_wrong = h.mastery(&l).await;
    let (_, right) = h.submit(&l, "bayes", &solution("bayes")).await;
    assert_eq!(right["result"]["overall"], "Accepted", "{right}");
    assert_eq!(right["task_completed"], true);
    let after_right = h.mastery(&l).await;
    for (kc, m) in &after_right {
        assert!(*m > after_wrong[kc]);
    }
    let (_, next) = h.get(&format!("/courses/{COURSE}/next-task"), Some(&l.token)).await;
    assert_eq!(next["task"]["task_id"], "dice");
    let (_, view) = h.get("/tasks/bayes", Some(&l.token)).await;
    assert_eq!(view["completed"], true);
    assert_eq!(view["snapshot"], solution("bayes"));
}

#[tokio::test]
async fn oversized_code_is_refused() {
    let h = start().await;
    let l = h.learner("dunlin").await;
    let (status, body) = h.submit(&l, "bayes", &"#".repeat(300 * 1024)).await;
    assert_eq!((status, body["code"].as_str()), (StatusCode::PAYLOAD_TOO_LARGE, Some("CodeTooLarge")));
}

#[tokio::test]
async fn sandbox_down_changes_nothing() {
    let h = Builder {
        sandbox: Arc::new(JudgeBackend::new("http://127.0.0.1:9")),
        ..Builder::default()
    }
    .start()
    .await;
    let l = h.learner("curlew").await;
    let (status, body) = h.submit(&l, "bayes", &solution("bayes")).await;
    assert_eq!((status, body["code"].as_str()), (StatusCode::SERVICE_UNAVAILABLE, Some("SandboxUnavailable")));
    assert!(h.mastery(&l).await.is_empty());
}

#[tokio::test]
async fn hint_needs_code_and_returns_text() {
    let h = start().await;
    let l = h.learner("sanderling").await;
    let (status, body) = h.post("/tasks/bayes/hint", Some(&l.token), json!({})).await;
    assert_eq!((status, body["code"].as_str()), (StatusCode::CONFLICT, Some("NoSnapshot")));
    let (status, _) = h
        .call(Method::PUT, "/tasks/bayes/snapshot", Some(&l.token), Some(json!({"code": "x = 1"})))
        .await;
    assert_eq!(status, StatusCode::OK);
    let (status, body) = h.post("/tasks/bayes/hint", Some(&l.token), json!({})).await;
    assert_eq!(status, StatusCode::OK, "{body}");
    assert_eq!(body["certainty"], 1.0);
    assert_eq!(body["revised"], false);
    assert!(body["text"].as_str().unwrap().contains("formula"));
}

#[tokio::test]
async fn hint_without_llm_is_unavailable() {
    let h = Builder {
        llm: Arc::new(tutor_server::state::NoLlm),
        ..Builder::default()
    }
    .start()
    .await;
    let l = h.learner("whimbrel").await;
    h.call(Method::PUT, "/tasks/bayes/snapshot", Some(&l.token), Some(json!({"code": "x = 1"})))
        .await;
    let (status, _) = h.post("/tasks/bayes/hint", Some(&l.token), json!({})).await;
    assert_eq!(status, StatusCode::SERVICE_UNAVAILABLE);
}

fn cursor(l: &Learner, at_ms: i64) -> serde_json::Value {
    json!({"user_id": l.user_id, "session_id": "s1", "task_id": "bayes", "at_ms": at_ms,
           "kind": "cursor_move", "payload": {"offset": 0}})
}

#[tokio::test]
async fn telemetry_is_consent_gated() {
    let h = start().await;
    let l = h.learner("turnstone").await;
    let batch = json!({"events": [cursor(&l, 1), cursor(&l, 2)]});
    let (_, body) = h.post("/telemetry/batch", Some(&l.token), batch.clone()).await;
    assert_eq!(body["accepted"], 0);
    h.consent(&l, true).await;
    let (_, body) = h.post("/telemetry/batch", Some(&l.token), batch.clone()).await;
    assert_eq!(body["accepted"], 2);
    let bad = json!({"events": [cursor(&l, 3), {"kind": "teleport"}]});
    let (status, body) = h.post("/telemetry/batch", Some(&l.token), bad).await;
    assert_eq!((status, body["code"].as_str(), body["index"].as_u64()), (StatusCode::BAD_REQUEST, Some("MalformedEvent"), Some(1)));
    let mut foreign = cursor(&l, 4);
    foreign["user_id"] = json!("someone_else");
    let (status, _) = h.post("/telemetry/batch", Some(&l.token), json!({"events": [foreign]})).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    h.consent(&l, false).await;
    let (_, body) = h.post("/telemetry/batch", Some(&l.token), batch).await;
    assert_eq!(body["accepted"], 0);
    // consent changes go to the operational log, not the research store
    assert_eq!(tutor_core::telemetry::ResearchStore::all_events(h.research.as_ref()).unwrap().len(), 2);
}

#[tokio::test]
async fn admin_routes_need_the_token() {
    let h = start().await;
    let l = h.learner("knot_bird").await;
    assert_eq!(h.get("/admin/usernames", None).await.0, StatusCode::FORBIDDEN);
    assert_eq!(h.get("/admin/usernames", Some(&l.token)).await.0, StatusCode::FORBIDDEN);
    let (status, body) = h.get("/admin/usernames", Some(ADMIN_TOKEN)).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(body["usernames"], json!(["knot_bird"]));
}

async fn upload(h: &Harness, bytes: Vec<u8>) -> (StatusCode, serde_json::Value) {
    let resp = h
        .http
        .post(format!("{}/admin/courses", h.base))
        .bearer_auth(ADMIN_TOKEN)
        .body(bytes)
        .send()
        .await
        .unwrap();
    (resp.status(), resp.json().await.unwrap())
}

#[tokio::test]
async fn course_upload() {
    let h = Builder { preload: false, ..Builder::default() }.start().await;
    let (status, body) = upload(&h, fixture_package()).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    assert_eq!(body["message"], "24 tasks loaded");
    assert_eq!(body["kcs"], 8);
    // re-uploading a course replaces it
    assert_eq!(upload(&h, fixture_package()).await.0, StatusCode::CREATED);
    let (status, body) = upload(&h, b"not a zip".to_vec()).await;
    assert_eq!(status, StatusCode::UNPROCESSABLE_ENTITY, "{body}");
    assert!(body["message"].is_string());

    let mut entries = read_entries(&fixture_package()).unwrap();
    let mut manifest: serde_json::Value = serde_json::from_slice(&entries["course.json"]).unwrap();
    manifest["course_id"] = json!("another_course");
    entries.insert("course.json".into(), serde_json::to_vec(&manifest).unwrap());
    let clash = tutor_core::archive::write_entries(entries.iter().map(|(k, v)| (k.as_str(), v.as_slice()))).unwrap();
    let (status, body) = upload(&h, clash).await;
    assert_eq!((status, body["code"].as_str()), (StatusCode::CONFLICT, Some("DuplicateId")));
}

#[tokio::test]
async fn export_is_anonymised() {
    let h = start().await;
    let l = h.learner("redshank").await;
    h.consent(&l, true).await;
    let (_, body) = h
        .post("/telemetry/batch", Some(&l.token), json!({"events": [cursor(&l, 1)]}))
        .await;
    assert_eq!(body["accepted"], 1);
    let (status, bytes) = h.admin_bytes(&format!("/admin/export?course_id={COURSE}")).await;
    assert_eq!(status, StatusCode::OK);
    let entries = read_entries(&bytes).unwrap();
    let events = String::from_utf8(entries["events.ndjson"].clone()).unwrap();
    let manifest: serde_json::Value = serde_json::from_slice(&entries["manifest.json"]).unwrap();
    assert_eq!(manifest["record_count"], 1);
    assert_eq!(manifest["course_id"], COURSE);
    assert!(events.contains("\"u1\""));
    for secret in [&l.username, &l.user_id, &l.token] {
        assert!(!bytes.windows(secret.len()).any(|w| w == secret.as_bytes()), "{secret}");
    }
    assert_eq!(h.admin_bytes("/admin/export?course_id=nope").await.0, StatusCode::NOT_FOUND);
}
