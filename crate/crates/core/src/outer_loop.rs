//! Task selection.
//!
//! Three policies pick the next task from the course's curriculum order, the
//! Q-matrix and the learner's ability: a fixed curriculum walk, a
//! mastery-gated walk that skips tasks whose skills are already mastered, and
//! difficulty matching. Experiments assign policies to users with a stable
//! hash so no assignment needs to be stored.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::domain::{Course, Task};
use crate::hash::fnv1a64;
use crate::learner::{SkillStates, DEFAULT_MASTERY_THRESHOLD};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    FixedCurriculum,
    MasteryGated,
    DifficultyMatch,
}

impl PolicyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PolicyKind::FixedCurriculum => "fixed_curriculum",
            PolicyKind::MasteryGated => "mastery_gated",
            PolicyKind::DifficultyMatch => "difficulty_match",
        }
    }
}

fn default_threshold() -> f64 {
    DEFAULT_MASTERY_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    pub kind: PolicyKind,
    #[serde(default = "default_threshold")]
    pub mastery_threshold: f64,
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self::new(PolicyKind::FixedCurriculum)
    }
}

impl PolicyConfig {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            mastery_threshold: DEFAULT_MASTERY_THRESHOLD,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.mastery_threshold > 0.0 && self.mastery_threshold <= 1.0 {
            Ok(())
        } else {
            Err(format!(
                "mastery_threshold {} not in (0, 1]",
                self.mastery_threshold
            ))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment_id: String,
    pub arms: Vec<PolicyConfig>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.experiment_id.is_empty() {
            return Err("experiment_id must not be empty".into());
        }
        if self.arms.is_empty() {
            return Err("an experiment needs at least one arm".into());
        }
        self.arms.iter().try_for_each(PolicyConfig::validate)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ProgressRecord {
    pub user_id: String,
    pub completed_task_ids: BTreeSet<String>,
    pub in_progress_task_id: Option<String>,
}

impl ProgressRecord {
    pub fn new(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            ..Default::default()
        }
    }

    pub fn complete(&mut self, task_id: &str) {
        self.completed_task_ids.insert(task_id.to_string());
        if self.in_progress_task_id.as_deref() == Some(task_id) {
            self.in_progress_task_id = None;
        }
    }

    pub fn open(&mut self, task_id: &str) {
        if !self.completed_task_ids.contains(task_id) {
            self.in_progress_task_id = Some(task_id.to_string());
        }
    }

    pub fn is_completed(&self, task_id: &str) -> bool {
        self.completed_task_ids.contains(task_id)
    }
}

fn uncompleted<'c: 'p, 'p>(
    course: &'c Course,
    progress: &'p ProgressRecord,
) -> impl Iterator<Item = &'c Task> + 'p {
    course
        .tasks
        .iter()
        .filter(move |t| !progress.is_completed(&t.task_id))
}

/// First task in curriculum order that is not completed; `None` once the
/// course is complete.
pub fn next_task_fixed<'c>(course: &'c Course, progress: &ProgressRecord) -> Option<&'c Task> {
    course
        .tasks
        .iter()
        .find(|t| !progress.is_completed(&t.task_id))
}

/// First uncompleted task that still exercises an unmastered component.
/// Falls back to the fixed curriculum when everything left is mastered.
pub fn next_task_mastery_gated<'c>(
    course: &'c Course,
    progress: &ProgressRecord,
    states: &SkillStates,
    threshold: f64,
) -> Option<&'c Task> {
    uncompleted(course, progress)
        .find(|t| {
            t.kc_ids
                .iter()
                .any(|kc| states.mastery(course, kc) < threshold)
        })
        .or_else(|| next_task_fixed(course, progress))
}

/// Uncompleted task whose difficulty is closest to the learner's ability on
/// it; ties go to the lowest curriculum index.
pub fn next_task_difficulty_match<'c>(
    course: &'c Course,
    progress: &ProgressRecord,
    states: &SkillStates,
) -> Option<&'c Task> {
    let mut best: Option<(&Task, f64)> = None;
    for task in uncompleted(course, progress) {
        let ability = course.tracer.ability(states, task, course);
        let gap = (task.difficulty - ability).abs();
        if best.is_none_or(|(_, g)| gap < g) {
            best = Some((task, gap));
        }
    }
    best.map(|(t, _)| t)
}

/// Dispatches to the policy named by `policy`.
pub fn recommend<'c>(
    course: &'c Course,
    progress: &ProgressRecord,
    states: &SkillStates,
    policy: &PolicyConfig,
) -> Option<&'c Task> {
    match policy.kind {
        PolicyKind::FixedCurriculum => next_task_fixed(course, progress),
        PolicyKind::MasteryGated => {
            next_task_mastery_gated(course, progress, states, policy.mastery_threshold)
        }
        PolicyKind::DifficultyMatch => next_task_difficulty_match(course, progress, states),
    }
}

/// Stable experiment arm for a user: FNV-1a 64 of `experiment_id:user_id`
/// modulo the number of arms.
///
/// # Panics
///
/// If `n_arms` is zero.
pub fn assign_arm(experiment_id: &str, user_id: &str, n_arms: usize) -> usize {
    assert!(n_arms >= 1, "an experiment needs at least one arm");
    let key = format!("{experiment_id}:{user_id}");
    (fnv1a64(key.as_bytes()) % n_arms as u64) as usize
}

/// Policy in effect for `user_id` on `course`, with the experiment arm if any.
pub fn resolve_policy(course: &Course, user_id: &str) -> (PolicyConfig, Option<usize>) {
    match &course.experiment {
        Some(exp) if !exp.arms.is_empty() => {
            let arm = assign_arm(&exp.experiment_id, user_id, exp.arms.len());
            (exp.arms[arm], Some(arm))
        }
        _ => (course.policy_default, None),
    }
}
