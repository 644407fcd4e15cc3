//! Remote backend speaking the public judge submission API.
//!
//! Field mapping:
//! - `POST {base}/submissions?base64_encoded=false&wait=false` with
//!   `{"source_code", "language_id", "cpu_time_limit" (seconds), "memory_limit" (KB)}`
//!   returns `{"token"}`.
//! - `GET {base}/submissions/{token}?base64_encoded=false&fields=stdout,stderr,status`
//!   is polled until the status id leaves 1 (In Queue) and 2 (Processing).
//! - Status 3 and 4 ran to completion, 5 is a timeout, 6 to 12 are
//!   compilation or runtime errors, 13 and 14 are judge faults.
//!
//! Transport failures and non-success HTTP replies are reported as
//! [`ExecutionError::SandboxUnavailable`].

use std::time::{Duration, Instant};

use async_trait::async_trait;
use serde::Deserialize;
use serde_json::json;

use super::{
    classify, parse_markers, tail, ExecutionError, ExecutionRequest, ExecutionResult,
    SandboxBackend, Termination, TAIL_BYTES,
};

/// "Python (3.8.1)" in the default judge language table.
pub const PYTHON3_LANGUAGE_ID: u32 = 71;

#[derive(Debug, Clone)]
pub struct JudgeBackend {
    base_url: String,
    http: reqwest::Client,
    pub language_id: u32,
    pub poll_interval: Duration,
    /// Added to the time limit to bound how long results are polled for.
    pub queue_allowance: Duration,
}

#[derive(Deserialize)]
struct Created {
    token: String,
}

#[derive(Deserialize)]
struct Status {
    id: u32,
}

#[derive(Deserialize)]
struct Submission {
    #[serde(default)]
    stdout: Option<String>,
    #[serde(default)]
    stderr: Option<String>,
    #[serde(default)]
    compile_output: Option<String>,
    status: Status,
}

fn unavailable(e: impl std::fmt::Display) -> ExecutionError {
    ExecutionError::SandboxUnavailable(e.to_string())
}

impl JudgeBackend {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            http: reqwest::Client::builder()
                .timeout(Duration::from_secs(10))
                .build()
                .expect("static client configuration"),
            language_id: PYTHON3_LANGUAGE_ID,
            poll_interval: Duration::from_millis(200),
            queue_allowance: Duration::from_secs(30),
        }
    }

    async fn fetch(&self, token: &str) -> Result<Submission, ExecutionError> {
        let url = format!(
            "{}/submissions/{token}?base64_encoded=false&fields=stdout,stderr,compile_output,status",
            self.base_url
        );
        let resp = self.http.get(url).send().await.map_err(unavailable)?;
        let resp = resp.error_for_status().map_err(unavailable)?;
        resp.json().await.map_err(unavailable)
    }
}

#[async_trait]
impl SandboxBackend for JudgeBackend {
    async fn run(&self, request: &ExecutionRequest) -> Result<ExecutionResult, ExecutionError> {
        let started = Instant::now();
        let body = json!({
            "source_code": request.source_code,
            "language_id": self.language_id,
            "cpu_time_limit": f64::from(request.time_limit_ms) / 1000.0,
            "memory_limit": request.memory_limit_kb,
        });
        let url = format!("{}/submissions?base64_encoded=false&wait=false", self.base_url);
        let resp = self.http.post(url).json(&body).send().await.map_err(unavailable)?;
        let created: Created = resp
            .error_for_status()
            .map_err(unavailable)?
            .json()
            .await
            .map_err(unavailable)?;

        let give_up = started
            + Duration::from_millis(u64::from(request.time_limit_ms))
            + self.queue_allowance;
        let submission = loop {
            let s = self.fetch(&created.token).await?;
            if s.status.id > 2 {
                break Some(s);
            }
            if Instant::now() >= give_up {
                break None;
            }
            tokio::time::sleep(self.poll_interval).await;
        };

        let (termination, stdout, stderr) = match submission {
            None => (Termination::SandboxFault, String::new(), String::new()),
            Some(s) => {
                let termination = match s.status.id {
                    3 | 4 => Termination::Exited { success: true },
                    5 => Termination::TimedOut,
                    6..=12 => Termination::Exited { success: false },
                    _ => Termination::SandboxFault,
                };
                let stderr = [s.compile_output, s.stderr]
                    .into_iter()
                    .flatten()
                    .collect::<Vec<_>>()
                    .join("\n");
                (termination, s.stdout.unwrap_or_default(), stderr)
            }
        };
        let verdicts = parse_markers(&stdout, request.declared_tests);
        Ok(ExecutionResult {
            overall: classify(termination, &verdicts),
            verdicts,
            stdout_tail: tail(&stdout, TAIL_BYTES),
            stderr_tail: tail(&stderr, TAIL_BYTES),
            wall_time_ms: started.elapsed().as_millis() as u64,
        })
    }
}
