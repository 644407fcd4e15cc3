//! LLM clients.
//!
//! [`HttpLlmClient`] speaks the service's generic completion contract:
//! `POST endpoint_url` with `{"model", "prompt", "temperature", "max_tokens"}`,
//! answered by `{"text"}`. [`StubLlm`] replays scripted responses keyed by
//! request hash or prompt substring, for hermetic tests and desk runs.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;

use crate::hash::fnv1a64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("LLM request timed out")]
    Timeout,
    #[error("LLM protocol error: {0}")]
    Protocol(String),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlmRequest {
    pub prompt: String,
    pub temperature: f64,
    pub max_tokens: u32,
}

#[async_trait]
pub trait LlmClient: Send + Sync {
    async fn complete(&self, request: &LlmRequest) -> Result<String, LlmError>;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LlmClientConfig {
    pub endpoint_url: String,
    pub model_name: String,
    pub temperature: f64,
    pub max_output_tokens: u32,
    pub request_timeout_ms: u64,
    pub max_concurrent: usize,
}

impl Default for LlmClientConfig {
    fn default() -> Self {
        Self {
            endpoint_url: "http://127.0.0.1:11500/v1/complete".into(),
            model_name: "llama-70b".into(),
            temperature: 0.7,
            max_output_tokens: 512,
            request_timeout_ms: 60_000,
            max_concurrent: 4,
        }
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
}

#[derive(Deserialize)]
struct WireResponse {
    text: String,
}

pub struct HttpLlmClient {
    http: reqwest::Client,
    config: LlmClientConfig,
    permits: Semaphore,
}

impl HttpLlmClient {
    pub fn new(config: LlmClientConfig) -> Result<Self, LlmError> {
        if config.max_concurrent == 0 || config.request_timeout_ms == 0 {
            return Err(LlmError::Protocol(
                "max_concurrent and request_timeout_ms must be positive".into(),
            ));
        }
        let http = reqwest::Client::builder()
            .timeout(Duration::from_millis(config.request_timeout_ms))
            .build()
            .map_err(|e| LlmError::Protocol(e.to_string()))?;
        Ok(Self {
            http,
            permits: Semaphore::new(config.max_concurrent),
            config,
        })
    }

    pub fn config(&self) -> &LlmClientConfig {
        &self.config
    }
}

#[async_trait]
impl LlmClient for HttpLlmClient {
    async fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        let _permit = self
            .permits
            .acquire()
            .await
            .map_err(|_| LlmError::Protocol("client shut down".into()))?;
        let body = WireRequest {
            model: &self.config.model_name,
            prompt: &request.prompt,
            temperature: request.temperature,
            max_tokens: request.max_tokens,
        };
        let response = self
            .http
            .post(&self.config.endpoint_url)
            .json(&body)
            .send()
            .await
            .map_err(map_reqwest)?;
        let status = response.status();
        if !status.is_success() {
            return Err(LlmError::Protocol(format!("endpoint answered {status}")));
        }
        let parsed: WireResponse = response.json().await.map_err(map_reqwest)?;
        Ok(parsed.text)
    }
}

fn map_reqwest(e: reqwest::Error) -> LlmError {
    if e.is_timeout() {
        LlmError::Timeout
    } else {
        LlmError::Protocol(e.to_string())
    }
}

/// Hash a stub uses to recognise a request: FNV-1a 64 of the prompt.
pub fn request_hash(prompt: &str) -> u64 {
    fnv1a64(prompt.as_bytes())
}

/// How a stub rule recognises a prompt.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StubMatch {
    /// Exact request hash, see [`request_hash`].
    Hash(u64),
    /// Prompt contains this substring.
    Contains(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StubReply {
    Text(String),
    /// Answers with a protocol error.
    Fail(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StubRule {
    #[serde(rename = "match")]
    pub matcher: StubMatch,
    /// Replies handed out in order; the last one repeats.
    pub replies: Vec<StubReply>,
}

/// Serialisable playback script for [`StubLlm`].
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StubScript {
    pub rules: Vec<StubRule>,
    #[serde(default)]
    pub delay_ms: u64,
}

/// Scripted LLM. Rules are tried in insertion order; a prompt no rule
/// matches gets a protocol error.
#[derive(Debug, Default)]
pub struct StubLlm {
    rules: Vec<(StubRule, AtomicUsize)>,
    delay: Duration,
    calls: AtomicUsize,
    prompts: Mutex<Vec<String>>,
}

impl StubLlm {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_script(script: StubScript) -> Self {
        let mut stub = Self::new().with_delay(Duration::from_millis(script.delay_ms));
        for rule in script.rules {
            stub = stub.rule(rule);
        }
        stub
    }

    pub fn rule(mut self, rule: StubRule) -> Self {
        self.rules.push((rule, AtomicUsize::new(0)));
        self
    }

    pub fn on_contains<I, S>(self, needle: &str, replies: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.rule(StubRule {
            matcher: StubMatch::Contains(needle.into()),
            replies: replies.into_iter().map(|s| StubReply::Text(s.into())).collect(),
        })
    }

    pub fn on_hash(self, hash: u64, reply: impl Into<String>) -> Self {
        self.rule(StubRule {
            matcher: StubMatch::Hash(hash),
            replies: vec![StubReply::Text(reply.into())],
        })
    }

    pub fn fail_on_contains(self, needle: &str, message: &str) -> Self {
        self.rule(StubRule {
            matcher: StubMatch::Contains(needle.into()),
            replies: vec![StubReply::Fail(message.into())],
        })
    }

    /// Sleeps this long before answering every request.
    pub fn with_delay(mut self, delay: Duration) -> Self {
        self.delay = delay;
        self
    }

    pub fn calls(&self) -> usize {
        self.calls.load(Ordering::SeqCst)
    }

    /// Number of received prompts containing `needle`.
    pub fn calls_matching(&self, needle: &str) -> usize {
        self.prompts
            .lock()
            .expect("stub prompt log")
            .iter()
            .filter(|p| p.contains(needle))
            .count()
    }

    pub fn prompts(&self) -> Vec<String> {
        self.prompts.lock().expect("stub prompt log").clone()
    }
}

#[async_trait]
impl LlmClient for StubLlm {
    async fn complete(&self, request: &LlmRequest) -> Result<String, LlmError> {
        self.calls.fetch_add(1, Ordering::SeqCst);
        self.prompts
            .lock()
            .expect("stub prompt log")
            .push(request.prompt.clone());
        if !self.delay.is_zero() {
            tokio::time::sleep(self.delay).await;
        }
        let hash = request_hash(&request.prompt);
        let (rule, cursor) = self
            .rules
            .iter()
            .find(|(r, _)| match &r.matcher {
                StubMatch::Hash(h) => *h == hash,
                StubMatch::Contains(n) => request.prompt.contains(n.as_str()),
            })
            .ok_or_else(|| LlmError::Protocol(format!("no scripted reply for request {hash:016x}")))?;
        if rule.replies.is_empty() {
            return Err(LlmError::Protocol("rule has no replies".into()));
        }
        let i = cursor.fetch_add(1, Ordering::SeqCst).min(rule.replies.len() - 1);
        match &rule.replies[i] {
            StubReply::Text(t) => Ok(t.clone()),
            StubReply::Fail(m) => Err(LlmError::Protocol(m.clone())),
        }
    }
}
