//! Out-of-process execution of learner code.
//!
//! The task's test script is appended to the learner's code and reports each
//! test on stdout as a `SCRIPT-TEST <n> PASS|FAIL` line. Backends only run the
//! program; verdicts come from the marker lines. [`LocalBackend`] spawns a
//! resource-limited subprocess, [`JudgeBackend`] delegates to a remote judge
//! with the public submission API shape.

mod judge;
mod local;

use std::sync::Arc;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;

use crate::domain::Task;

pub use judge::{JudgeBackend, PYTHON3_LANGUAGE_ID};
pub use local::LocalBackend;

/// Bytes of stdout/stderr kept in a result.
pub const TAIL_BYTES: usize = 4096;
pub const DEFAULT_WORKERS: usize = 4;
pub const MARKER_PREFIX: &str = "SCRIPT-TEST";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExecutionError {
    /// The sandbox itself could not be reached or started. Not the
    /// learner's fault, and never turned into an observation.
    #[error("sandbox unavailable: {0}")]
    SandboxUnavailable(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionRequest {
    /// Learner code, a newline, then the task's test script.
    pub source_code: String,
    pub language_tag: String,
    pub time_limit_ms: u32,
    pub memory_limit_kb: u32,
    pub declared_tests: u32,
}

impl ExecutionRequest {
    pub fn for_task(task: &Task, user_code: &str) -> Self {
        Self {
            source_code: format!("{user_code}\n{}", task.test_script),
            language_tag: "python3".into(),
            time_limit_ms: task.time_limit_ms,
            memory_limit_kb: task.memory_limit_kb,
            declared_tests: task.declared_tests().unwrap_or(1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestStatus {
    Pass,
    Fail,
    NotRun,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestVerdict {
    /// 1-based test number.
    pub index: u32,
    pub status: TestStatus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Overall {
    Accepted,
    Rejected,
    RuntimeError,
    Timeout,
    SandboxError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecutionResult {
    pub overall: Overall,
    pub verdicts: Vec<TestVerdict>,
    pub stdout_tail: String,
    pub stderr_tail: String,
    pub wall_time_ms: u64,
}

impl ExecutionResult {
    pub fn passed(&self) -> usize {
        self.verdicts
            .iter()
            .filter(|v| v.status == TestStatus::Pass)
            .count()
    }

    /// One-paragraph summary for prompts and the feedback pane.
    pub fn feedback_summary(&self) -> String {
        let mut out = format!(
            "{:?}: {} of {} tests passed.",
            self.overall,
            self.passed(),
            self.verdicts.len()
        );
        if let Some(v) = self.verdicts.iter().find(|v| v.status != TestStatus::Pass) {
            let state = if v.status == TestStatus::Fail { "failed" } else { "did not run" };
            out.push_str(&format!(" First unsuccessful test: {} ({state}).", v.index));
        }
        if self.overall == Overall::RuntimeError {
            if let Some(line) = self.stderr_tail.lines().rev().find(|l| !l.trim().is_empty()) {
                out.push_str(&format!(" Error: {}", line.trim()));
            }
        }
        out
    }
}

/// How the sandboxed program ended, before looking at markers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Termination {
    Exited { success: bool },
    TimedOut,
    SandboxFault,
}

pub(crate) fn classify(termination: Termination, verdicts: &[TestVerdict]) -> Overall {
    let all_pass = verdicts.iter().all(|v| v.status == TestStatus::Pass);
    match termination {
        Termination::SandboxFault => Overall::SandboxError,
        _ if all_pass => Overall::Accepted,
        Termination::TimedOut => Overall::Timeout,
        Termination::Exited { success: false } => Overall::RuntimeError,
        Termination::Exited { success: true } => Overall::Rejected,
    }
}

/// Last `max` bytes of `s`, cut at a character boundary.
pub(crate) fn tail(s: &str, max: usize) -> String {
    if s.len() <= max {
        return s.to_string();
    }
    let mut start = s.len() - max;
    while !s.is_char_boundary(start) {
        start += 1;
    }
    s[start..].to_string()
}

/// One verdict per declared test from `SCRIPT-TEST <n> PASS|FAIL` lines.
/// Unknown lines are ignored, missing tests are `NotRun` and the last line
/// for a test wins.
pub fn parse_markers(stdout: &str, declared_tests: u32) -> Vec<TestVerdict> {
    let mut statuses = vec![TestStatus::NotRun; declared_tests as usize];
    for line in stdout.lines() {
        let mut parts = line.split_whitespace();
        if parts.next() != Some(MARKER_PREFIX) {
            continue;
        }
        let (Some(index), Some(word), None) = (parts.next(), parts.next(), parts.next()) else {
            continue;
        };
        let Ok(index) = index.parse::<usize>() else {
            continue;
        };
        let status = match word {
            "PASS" => TestStatus::Pass,
            "FAIL" => TestStatus::Fail,
            _ => continue,
        };
        if (1..=statuses.len()).contains(&index) {
            statuses[index - 1] = status;
        }
    }
    statuses
        .into_iter()
        .enumerate()
        .map(|(i, status)| TestVerdict {
            index: i as u32 + 1,
            status,
        })
        .collect()
}

/// Whether the submission counts as a correct response for knowledge tracing.
pub fn to_observation(result: &ExecutionResult) -> bool {
    result.overall == Overall::Accepted
}

#[async_trait]
pub trait SandboxBackend: Send + Sync {
    async fn run(&self, request: &ExecutionRequest) -> Result<ExecutionResult, ExecutionError>;
}

pub async fn run_submission(
    request: &ExecutionRequest,
    backend: &dyn SandboxBackend,
) -> Result<ExecutionResult, ExecutionError> {
    backend.run(request).await
}

/// Bounded worker pool in front of a backend. Waiting requests are served in
/// FIFO order; the time limit only starts once a worker picks a request up.
#[derive(Clone)]
pub struct Executor {
    backend: Arc<dyn SandboxBackend>,
    workers: Arc<Semaphore>,
}

impl Executor {
    pub fn new(backend: Arc<dyn SandboxBackend>, workers: usize) -> Self {
        Self {
            backend,
            workers: Arc::new(Semaphore::new(workers.max(1))),
        }
    }

    pub async fn run(&self, request: &ExecutionRequest) -> Result<ExecutionResult, ExecutionError> {
        let _permit = self
            .workers
            .acquire()
            .await
            .map_err(|_| ExecutionError::SandboxUnavailable("executor shut down".into()))?;
        self.backend.run(request).await
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use TestStatus::*;

    fn statuses(v: &[TestVerdict]) -> Vec<TestStatus> {
        v.iter().map(|v| v.status).collect()
    }

    #[test]
    fn markers_basic() {
        let v = parse_markers("SCRIPT-TEST 1 PASS\nSCRIPT-TEST 2 FAIL\n", 2);
        assert_eq!(statuses(&v), [Pass, Fail]);
        assert_eq!(v.iter().map(|v| v.index).collect::<Vec<_>>(), [1, 2]);
    }

    #[test]
    fn markers_missing_and_duplicates() {
        assert_eq!(statuses(&parse_markers("", 2)), [NotRun, NotRun]);
        let v = parse_markers("noise\nSCRIPT-TEST 1 FAIL\nSCRIPT-TEST 1 PASS", 1);
        assert_eq!(statuses(&v), [Pass]);
    }

    #[test]
    fn markers_ignore_garbage() {
        let out = "SCRIPT-TEST 0 PASS\nSCRIPT-TEST 3 PASS\nSCRIPT-TEST x PASS\nSCRIPT-TEST 1 MAYBE\n\
                   SCRIPT-TEST 1 PASS trailing\nxSCRIPT-TEST 1 PASS\n  SCRIPT-TEST 2 PASS  \r\n";
        assert_eq!(statuses(&parse_markers(out, 2)), [NotRun, Pass]);
    }

    #[test]
    fn overall_classification() {
        let pass = parse_markers("SCRIPT-TEST 1 PASS", 1);
        let fail = parse_markers("SCRIPT-TEST 1 FAIL", 1);
        let none = parse_markers("", 1);
        assert_eq!(classify(Termination::Exited { success: true }, &pass), Overall::Accepted);
        assert_eq!(classify(Termination::Exited { success: true }, &fail), Overall::Rejected);
        assert_eq!(classify(Termination::Exited { success: false }, &none), Overall::RuntimeError);
        assert_eq!(classify(Termination::TimedOut, &none), Overall::Timeout);
        assert_eq!(classify(Termination::SandboxFault, &pass), Overall::SandboxError);
    }

    fn result(overall: Overall, verdicts: &[TestStatus]) -> ExecutionResult {
        ExecutionResult {
            overall,
            verdicts: verdicts
                .iter()
                .enumerate()
                .map(|(i, s)| TestVerdict { index: i as u32 + 1, status: *s })
                .collect(),
            stdout_tail: String::new(),
            stderr_tail: "Traceback\nNameError: name 'y' is not defined\n".into(),
            wall_time_ms: 3,
        }
    }

    #[test]
    fn observation_is_acceptance() {
        assert!(to_observation(&result(Overall::Accepted, &[Pass])));
        assert!(!to_observation(&result(Overall::Timeout, &[NotRun])));
        assert!(!to_observation(&result(Overall::Rejected, &[Pass, Fail])));
    }

    #[test]
    fn summary_mentions_first_problem() {
        let s = result(Overall::Rejected, &[Pass, Fail, NotRun]).feedback_summary();
        assert_eq!(s, "Rejected: 1 of 3 tests passed. First unsuccessful test: 2 (failed).");
        let s = result(Overall::RuntimeError, &[NotRun]).feedback_summary();
        assert!(s.ends_with("Error: NameError: name 'y' is not defined"));
    }

    #[test]
    fn tail_respects_char_boundaries() {
        assert_eq!(tail("abc", 10), "abc");
        assert_eq!(tail("abcdef", 3), "def");
        assert_eq!(tail("aé", 1), "");
        assert_eq!(tail("aéb", 2), "b");
    }
}
