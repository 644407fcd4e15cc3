//! Boots the service in-process for integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use reqwest::{Method, StatusCode};
use serde_json::{json, Value};
use tutor_core::domain::pack_dir;
use tutor_core::executor::{LocalBackend, SandboxBackend};
use tutor_core::inner_loop::{LlmClient, StubLlm};
use tutor_core::telemetry::MemoryResearchStore;
use tutor_server::state::Parts;
use tutor_server::store::MemoryStore;
use tutor_server::{AppState, Config};

pub const ADMIN_TOKEN: &str = "test-admin-token-0123456789";
pub const COURSE: &str = "intro_data_mining_exam_prep";
pub const PASSWORD: &str = "correct horse battery";

pub const STEP: &str = "### TASK: NEXT STEP";
pub const HINT: &str = "### TASK: HINT";
pub const REVISE: &str = "### TASK: REVISE HINT";

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

pub fn fixture_package() -> Vec<u8> {
    pack_dir(&fixtures().join("exam_prep")).unwrap()
}

pub fn solution(task_id: &str) -> String {
    std::fs::read_to_string(fixtures().join(format!("exam_prep_solutions/{task_id}.py"))).unwrap()
}

/// Stub that answers every prompt of one hint request.
pub fn default_stub() -> StubLlm {
    StubLlm::new()
        .on_contains(REVISE, ["Compare your result with what the task asks for."])
        .on_contains(STEP, ["```python\nresult = compute(values)\n```"])
        .on_contains(HINT, ["Look again at the formula in the description and check each term."])
}

pub fn test_config() -> Config {
    Config {
        admin_token: Some(ADMIN_TOKEN.into()),
        argon2_memory_kib: 1024,
        argon2_iterations: 1,
        ..Config::default()
    }
}

pub struct Harness {
    pub base: String,
    pub http: reqwest::Client,
    pub state: AppState,
    pub store: Arc<MemoryStore>,
    pub research: Arc<MemoryResearchStore>,
    _shutdown: tokio::sync::oneshot::Sender<()>,
}

pub struct Builder {
    pub config: Config,
    pub sandbox: Arc<dyn SandboxBackend>,
    pub llm: Arc<dyn LlmClient>,
    pub preload: bool,
}

impl Default for Builder {
    fn default() -> Self {
        Self {
            config: test_config(),
            sandbox: Arc::new(LocalBackend::default()),
            llm: Arc::new(default_stub()),
            preload: true,
        }
    }
}

impl Builder {
    pub async fn start(self) -> Harness {
        let store = Arc::new(MemoryStore::new());
        let research = Arc::new(MemoryResearchStore::default());
        let state = AppState::from_parts(Parts {
            config: self.config,
            store: store.clone(),
            research: research.clone(),
            sandbox: self.sandbox,
            llm: self.llm,
        })
        .unwrap();
        if self.preload {
            let course = tutor_core::domain::load_course_package(&fixture_package()).unwrap();
            state.install_course(course).unwrap();
        }
        let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
        let base = format!("http://{}/api/v1", listener.local_addr().unwrap());
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let served = state.clone();
        tokio::spawn(async move {
            tutor_server::serve(served, listener, async {
                let _ = rx.await;
            })
            .await
            .unwrap();
        });
        Harness {
            base,
            http: reqwest::Client::new(),
            state,
            store,
            research,
            _shutdown: tx,
        }
    }
}

pub async fn start() -> Harness {
    Builder::default().start().await
}

/// A logged-in learner.
#[derive(Debug, Clone)]
pub struct Learner {
    pub username: String,
    pub user_id: String,
    pub token: String,
}

impl Harness {
    pub async fn call(&self, method: Method, path: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = self.http.request(method, format!("{}{}", self.base, path));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp = req.send().await.unwrap();
        let status = resp.status();
        let bytes = resp.bytes().await.unwrap();
        let value = serde_json::from_slice(&bytes).unwrap_or(Value::Null);
        (status, value)
    }

    pub async fn post(&self, path: &str, token: Option<&str>, body: Value) -> (StatusCode, Value) {
        self.call(Method::POST, path, token, Some(body)).await
    }

    pub async fn get(&self, path: &str, token: Option<&str>) -> (StatusCode, Value) {
        self.call(Method::GET, path, token, None).await
    }

    pub async fn register(&self, username: &str) -> (StatusCode, Value) {
        self.post("/register", None, json!({"username": username, "password": PASSWORD})).await
    }

    pub async fn login(&self, username: &str, password: &str) -> (StatusCode, Value) {
        self.post("/login", None, json!({"username": username, "password": password})).await
    }

    pub async fn learner(&self, username: &str) -> Learner {
        let (status, body) = self.register(username).await;
        assert_eq!(status, StatusCode::CREATED, "{body}");
        let (status, body) = self.login(username, PASSWORD).await;
        assert_eq!(status, StatusCode::OK, "{body}");
        Learner {
            username: username.into(),
            user_id: body["user_id"].as_str().unwrap().into(),
            token: body["token"].as_str().unwrap().into(),
        }
    }

    pub async fn consent(&self, l: &Learner, on: bool) {
        let (status, body) = self.post("/consent", Some(&l.token), json!({"research_consent": on})).await;
        assert_eq!(status, StatusCode::OK, "{body}");
    }

    pub async fn submit(&self, l: &Learner, task_id: &str, code: &str) -> (StatusCode, Value) {
        self.post(&format!("/tasks/{task_id}/submit"), Some(&l.token), json!({"code": code})).await
    }

    pub async fn mastery(&self, l: &Learner) -> std::collections::BTreeMap<String, f64> {
        let (status, body) = self.get("/me/mastery", Some(&l.token)).await;
        assert_eq!(status, StatusCode::OK);
        body["kcs"]
            .as_array()
            .unwrap()
            .iter()
            .map(|k| (k["kc_id"].as_str().unwrap().to_string(), k["mastery"].as_f64().unwrap()))
            .collect()
    }

    pub async fn admin_bytes(&self, path: &str) -> (StatusCode, Vec<u8>) {
        let resp = self
            .http
            .get(format!("{}{}", self.base, path))
            .bearer_auth(ADMIN_TOKEN)
            .send()
            .await
            .unwrap();
        (resp.status(), resp.bytes().await.unwrap().to_vec())
    }
}
