//! Next-step hints.
//!
//! A Step Generator prompt asks the LLM for the learner's next program state
//! (the whole file). A Hint Generator prompt is sampled `k` times to verbalise
//! that step without giving it away. Agreement between the samples (mean
//! pairwise token Jaccard) is the hint's certainty; below the revision
//! threshold one extra call consolidates the candidates. Every hint passes
//! the leak guard before it leaves the pipeline.

pub mod llm;
pub mod prompt;
pub mod text;

use std::time::Duration;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use llm::{
    request_hash, HttpLlmClient, LlmClient, LlmClientConfig, LlmError, LlmRequest, StubLlm, StubMatch,
    StubReply, StubRule, StubScript,
};
pub use prompt::{build_step_prompt, PromptTemplates};
pub use text::{jaccard, leak_guard, MASK};

use llm::LlmRequest as Request;

pub const DEFAULT_K_SAMPLES: usize = 3;
pub const DEFAULT_REVISION_THRESHOLD: f64 = 0.4;
pub const DEFAULT_MAX_RUN: usize = 6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InnerLoopError {
    #[error("LLM request timed out")]
    LlmTimeout,
    #[error("LLM protocol error: {0}")]
    LlmProtocolError(String),
    #[error("LLM response contains no fenced code block")]
    NoCodeBlockInResponse,
    #[error("unknown template placeholder `{{{0}}}`")]
    UnknownPlaceholder(String),
    #[error("inner loop failed: {0}")]
    InnerLoopFailed(String),
}

impl From<LlmError> for InnerLoopError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::Timeout => InnerLoopError::LlmTimeout,
            LlmError::Protocol(m) => InnerLoopError::LlmProtocolError(m),
        }
    }
}

/// Task and learner context available to the prompt templates.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PromptContext {
    pub task_description: String,
    pub starter_code: String,
    pub current_code: String,
    /// Verdict summary and first failing test of the latest run.
    pub last_execution_feedback: String,
    pub kc_titles: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepPrediction {
    /// Full predicted next program state.
    pub predicted_code: String,
    pub rationale: String,
    pub raw_response: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hint {
    pub text: String,
    /// Whether the leak guard masked part of the text.
    pub masked: bool,
    pub certainty: f64,
    pub revised: bool,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertaintyReport {
    pub samples: Vec<String>,
    /// Jaccard similarity of every sample pair `(i, j)`, `i < j`, row-major.
    pub pairwise_scores: Vec<f64>,
    pub certainty: f64,
}

#[derive(Debug, Clone)]
pub struct InnerLoopConfig {
    pub templates: PromptTemplates,
    pub k_samples: usize,
    pub revision_threshold: f64,
    pub max_run: usize,
    pub temperature: f64,
    pub max_output_tokens: u32,
    /// Deadline for each individual LLM call.
    pub request_timeout: Duration,
}

impl Default for InnerLoopConfig {
    fn default() -> Self {
        Self {
            templates: PromptTemplates::default(),
            k_samples: DEFAULT_K_SAMPLES,
            revision_threshold: DEFAULT_REVISION_THRESHOLD,
            max_run: DEFAULT_MAX_RUN,
            temperature: 0.7,
            max_output_tokens: 512,
            request_timeout: Duration::from_secs(60),
        }
    }
}

/// Result of one full inner-loop run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InnerLoopOutcome {
    pub step: StepPrediction,
    pub hint: Hint,
    pub report: CertaintyReport,
}

async fn call(llm: &dyn LlmClient, prompt: String, config: &InnerLoopConfig) -> Result<String, InnerLoopError> {
    let request = Request {
        prompt,
        temperature: config.temperature,
        max_tokens: config.max_output_tokens,
    };
    match tokio::time::timeout(config.request_timeout, llm.complete(&request)).await {
        Ok(result) => Ok(result?),
        Err(_) => Err(InnerLoopError::LlmTimeout),
    }
}

/// Splits a response into its first fenced code block and the surrounding
/// prose. The info string after the opening fence is dropped.
pub fn extract_code_block(response: &str) -> Option<(String, String)> {
    let open = response.find("```")?;
    let after_fence = &response[open + 3..];
    let body_start = after_fence.find('\n')? + 1;
    let body = &after_fence[body_start..];
    let close = body.find("```")?;
    let code = body[..close].trim_end_matches(['\n', '\r']).to_string();
    if code.trim().is_empty() {
        return None;
    }
    let before = response[..open].trim();
    let after = body[close + 3..].trim();
    let rationale = [before, after]
        .iter()
        .filter(|s| !s.is_empty())
        .copied()
        .collect::<Vec<_>>()
        .join("\n");
    Some((code, rationale))
}

/// Step Generator: one LLM call predicting the next program state.
pub async fn generate_step(
    ctx: &PromptContext,
    llm: &dyn LlmClient,
    config: &InnerLoopConfig,
) -> Result<StepPrediction, InnerLoopError> {
    let prompt = prompt::build_step_prompt(ctx, &config.templates.step)?;
    let raw = call(llm, prompt, config).await?;
    let (predicted_code, rationale) =
        extract_code_block(&raw).ok_or(InnerLoopError::NoCodeBlockInResponse)?;
    Ok(StepPrediction {
        predicted_code,
        rationale,
        raw_response: raw,
    })
}

/// Mean pairwise Jaccard over the samples; 1 for a single sample.
pub fn certainty_report(samples: Vec<String>) -> CertaintyReport {
    let mut pairwise_scores = Vec::with_capacity(samples.len() * samples.len().saturating_sub(1) / 2);
    for i in 0..samples.len() {
        for j in i + 1..samples.len() {
            pairwise_scores.push(jaccard(&samples[i], &samples[j]));
        }
    }
    let certainty = if pairwise_scores.is_empty() {
        1.0
    } else {
        pairwise_scores.iter().sum::<f64>() / pairwise_scores.len() as f64
    };
    CertaintyReport {
        samples,
        pairwise_scores,
        certainty: certainty.clamp(0.0, 1.0),
    }
}

/// Index of the sample most similar on average to the others (lowest index
/// on ties).
pub fn most_central(samples: &[String]) -> usize {
    if samples.len() < 2 {
        return 0;
    }
    let mut best = (0, f64::NEG_INFINITY);
    for (i, s) in samples.iter().enumerate() {
        let mean = samples
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, o)| jaccard(s, o))
            .sum::<f64>()
            / (samples.len() - 1) as f64;
        if mean > best.1 {
            best = (i, mean);
        }
    }
    best.0
}

fn non_empty(text: String) -> Result<String, InnerLoopError> {
    let trimmed = text.trim();
    if trimmed.is_empty() {
        Err(InnerLoopError::LlmProtocolError("empty hint".into()))
    } else {
        Ok(trimmed.to_string())
    }
}

/// Hint Generator with certainty-gated revision.
pub async fn generate_hint(
    ctx: &PromptContext,
    step: &StepPrediction,
    llm: &dyn LlmClient,
    config: &InnerLoopConfig,
) -> Result<(Hint, CertaintyReport), InnerLoopError> {
    let k = config.k_samples.max(1);
    let prompt = prompt::build_hint_prompt(ctx, &step.predicted_code, &config.templates.hint)?;
    let calls = (0..k).map(|_| call(llm, prompt.clone(), config));
    let samples = futures::future::try_join_all(calls)
        .await?
        .into_iter()
        .map(non_empty)
        .collect::<Result<Vec<_>, _>>()?;

    let report = certainty_report(samples);
    let chosen = &report.samples[most_central(&report.samples)];
    let (mut text, mut masked) = leak_guard(chosen, &step.predicted_code, config.max_run);
    let mut revised = false;

    if report.certainty < config.revision_threshold {
        let prompt = prompt::build_revision_prompt(
            ctx,
            &step.predicted_code,
            &report.samples,
            &config.templates.revision,
        )?;
        let consolidated = non_empty(call(llm, prompt, config).await?)?;
        (text, masked) = leak_guard(&consolidated, &step.predicted_code, config.max_run);
        revised = true;
    }

    let hint = Hint {
        text,
        masked,
        certainty: report.certainty,
        revised,
        created_at: Utc::now(),
    };
    Ok((hint, report))
}

/// Step then hint. A response without a code block gets one retry of the
/// Step Generator.
pub async fn run_inner_loop(
    ctx: &PromptContext,
    llm: &dyn LlmClient,
    config: &InnerLoopConfig,
) -> Result<InnerLoopOutcome, InnerLoopError> {
    let step = match generate_step(ctx, llm, config).await {
        Err(InnerLoopError::NoCodeBlockInResponse) => match generate_step(ctx, llm, config).await {
            Err(InnerLoopError::NoCodeBlockInResponse) => {
                return Err(InnerLoopError::InnerLoopFailed(
                    "step generator returned no code block twice".into(),
                ))
            }
            other => other?,
        },
        other => other?,
    };
    let (hint, report) = generate_hint(ctx, &step, llm, config).await?;
    Ok(InnerLoopOutcome { step, hint, report })
}
