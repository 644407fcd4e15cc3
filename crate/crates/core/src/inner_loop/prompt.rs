//! Prompt templates with `{name}` placeholders.
//!
//! `{{` and `}}` produce literal braces. Any other `{identifier}` must be a
//! placeholder known to the template kind, otherwise rendering fails.

use super::{InnerLoopError, PromptContext};

pub const STEP_PLACEHOLDERS: &[&str] = &[
    "task_description",
    "starter_code",
    "current_code",
    "execution_feedback",
    "kc_list",
];
pub const HINT_PLACEHOLDERS: &[&str] = &[
    "task_description",
    "starter_code",
    "current_code",
    "execution_feedback",
    "kc_list",
    "predicted_code",
];
pub const REVISION_PLACEHOLDERS: &[&str] = &[
    "task_description",
    "starter_code",
    "current_code",
    "execution_feedback",
    "kc_list",
    "predicted_code",
    "candidates",
];

pub const DEFAULT_STEP_TEMPLATE: &str = include_str!("../../prompts/step.txt");
pub const DEFAULT_HINT_TEMPLATE: &str = include_str!("../../prompts/hint.txt");
pub const DEFAULT_REVISION_TEMPLATE: &str = include_str!("../../prompts/revision.txt");

/// The three templates used by one inner-loop run.
#[derive(Debug, Clone, PartialEq)]
pub struct PromptTemplates {
    pub step: String,
    pub hint: String,
    pub revision: String,
}

impl Default for PromptTemplates {
    fn default() -> Self {
        Self {
            step: DEFAULT_STEP_TEMPLATE.to_string(),
            hint: DEFAULT_HINT_TEMPLATE.to_string(),
            revision: DEFAULT_REVISION_TEMPLATE.to_string(),
        }
    }
}

impl PromptTemplates {
    /// Built-in templates with course overrides applied.
    pub fn with_overrides(overrides: &crate::domain::PromptOverrides) -> Self {
        let d = Self::default();
        Self {
            step: overrides.step.clone().unwrap_or(d.step),
            hint: overrides.hint.clone().unwrap_or(d.hint),
            revision: overrides.revision.clone().unwrap_or(d.revision),
        }
    }

    /// Checks every template against its placeholder set.
    pub fn validate(&self) -> Result<(), InnerLoopError> {
        let probe = |t: &str, allowed: &[&str]| {
            render(t, allowed, |_| Some(String::new())).map(|_| ())
        };
        probe(&self.step, STEP_PLACEHOLDERS)?;
        probe(&self.hint, HINT_PLACEHOLDERS)?;
        probe(&self.revision, REVISION_PLACEHOLDERS)
    }
}

/// Substitutes placeholders in one left-to-right pass; substituted values are
/// never rescanned.
pub fn render<F>(template: &str, allowed: &[&str], mut value: F) -> Result<String, InnerLoopError>
where
    F: FnMut(&str) -> Option<String>,
{
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(pos) = rest.find(['{', '}']) {
        out.push_str(&rest[..pos]);
        let tail = &rest[pos..];
        if tail.starts_with("{{") || tail.starts_with("}}") {
            out.push_str(&tail[..1]);
            rest = &tail[2..];
            continue;
        }
        if let Some(inner) = tail.strip_prefix('{') {
            if let Some(end) = inner.find('}') {
                let name = &inner[..end];
                if !name.is_empty() && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    if !allowed.contains(&name) {
                        return Err(InnerLoopError::UnknownPlaceholder(name.to_string()));
                    }
                    let v = value(name)
                        .ok_or_else(|| InnerLoopError::UnknownPlaceholder(name.to_string()))?;
                    out.push_str(&v);
                    rest = &tail[end + 2..];
                    continue;
                }
            }
        }
        out.push_str(&tail[..1]);
        rest = &tail[1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn context_value(ctx: &PromptContext, name: &str) -> Option<String> {
    Some(match name {
        "task_description" => ctx.task_description.clone(),
        "starter_code" => ctx.starter_code.clone(),
        "current_code" => ctx.current_code.clone(),
        "execution_feedback" => ctx.last_execution_feedback.clone(),
        "kc_list" => ctx.kc_titles.join(", "),
        _ => return None,
    })
}

/// Fills a Step Generator template from the prompt context.
pub fn build_step_prompt(ctx: &PromptContext, template: &str) -> Result<String, InnerLoopError> {
    render(template, STEP_PLACEHOLDERS, |n| context_value(ctx, n))
}

pub fn build_hint_prompt(
    ctx: &PromptContext,
    predicted_code: &str,
    template: &str,
) -> Result<String, InnerLoopError> {
    render(template, HINT_PLACEHOLDERS, |n| match n {
        "predicted_code" => Some(predicted_code.to_string()),
        _ => context_value(ctx, n),
    })
}

pub fn build_revision_prompt(
    ctx: &PromptContext,
    predicted_code: &str,
    candidates: &[String],
    template: &str,
) -> Result<String, InnerLoopError> {
    let listing = candidates
        .iter()
        .enumerate()
        .map(|(i, c)| format!("Candidate {}:\n{}", i + 1, c.trim()))
        .collect::<Vec<_>>()
        .join("\n\n");
    render(template, REVISION_PLACEHOLDERS, |n| match n {
        "predicted_code" => Some(predicted_code.to_string()),
        "candidates" => Some(listing.clone()),
        _ => context_value(ctx, n),
    })
}
