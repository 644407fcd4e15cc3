//! Courses, tasks, knowledge components and the Q-matrix.
//!
//! A [`Course`] is immutable once validated. Courses enter the system as zip
//! packages (see [`package`]) and every constructor funnels through the same
//! validation, so any `Course` value in circulation satisfies its invariants.

pub mod package;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::learner::{BktParams, PfaParams, TracerKind};
use crate::outer_loop::{ExperimentConfig, PolicyConfig};

pub use package::{load_course_package, pack_dir, write_course_package};

pub const MIN_TIME_LIMIT_MS: u32 = 100;
pub const MAX_TIME_LIMIT_MS: u32 = 30_000;
pub const MIN_MEMORY_LIMIT_KB: u32 = 16_384;

/// Directive in a test script declaring how many marker lines it emits.
pub const TEST_COUNT_DIRECTIVE: &str = "# SCRIPT-TESTS:";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DomainError {
    #[error("malformed archive: {0}")]
    MalformedArchive(String),
    #[error("manifest schema error at `{path}`: {message}")]
    ManifestSchemaError { path: String, message: String },
    #[error("task `{task_id}` references undeclared knowledge component `{kc_id}`")]
    UnknownKcReference { task_id: String, kc_id: String },
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("difficulty of task `{0}` is outside [0, 1]")]
    DifficultyOutOfRange(String),
    #[error("task `{0}` not found")]
    TaskNotFound(String),
}

impl DomainError {
    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        DomainError::ManifestSchemaError {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            DomainError::MalformedArchive(_) => "MalformedArchive",
            DomainError::ManifestSchemaError { .. } => "ManifestSchemaError",
            DomainError::UnknownKcReference { .. } => "UnknownKcReference",
            DomainError::DuplicateId(_) => "DuplicateId",
            DomainError::DifficultyOutOfRange(_) => "DifficultyOutOfRange",
            DomainError::TaskNotFound(_) => "TaskNotFound",
        }
    }
}

pub type Result<T, E = DomainError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnowledgeComponent {
    pub kc_id: String,
    pub title: String,
    pub description: Option<String>,
    /// Per-component BKT parameters; course defaults apply when absent.
    pub bkt: Option<BktParams>,
    pub pfa: Option<PfaParams>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub task_id: String,
    pub title: String,
    pub description_markdown: String,
    pub starter_code: String,
    /// Appended to the learner's code; prints `SCRIPT-TEST <n> PASS|FAIL` lines.
    pub test_script: String,
    pub kc_ids: Vec<String>,
    pub difficulty: f64,
    pub curriculum_index: u32,
    pub time_limit_ms: u32,
    pub memory_limit_kb: u32,
}

impl Task {
    /// Number of tests the test script declares, from its
    /// `# SCRIPT-TESTS: <n>` line.
    pub fn declared_tests(&self) -> Option<u32> {
        parse_test_count(&self.test_script)
    }
}

pub(crate) fn parse_test_count(script: &str) -> Option<u32> {
    script.lines().find_map(|line| {
        line.trim()
            .strip_prefix(TEST_COUNT_DIRECTIVE)
            .and_then(|rest| rest.trim().parse::<u32>().ok())
            .filter(|&n| n >= 1)
    })
}

/// Course-specific prompt templates; built-in defaults apply when absent.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PromptOverrides {
    pub step: Option<String>,
    pub hint: Option<String>,
    pub revision: Option<String>,
}

impl PromptOverrides {
    pub fn is_empty(&self) -> bool {
        self.step.is_none() && self.hint.is_none() && self.revision.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Course {
    pub course_id: String,
    pub title: String,
    pub policy_default: PolicyConfig,
    pub tracer: TracerKind,
    pub experiment: Option<ExperimentConfig>,
    pub prompts: PromptOverrides,
    pub kcs: Vec<KnowledgeComponent>,
    /// Sorted by `curriculum_index`.
    pub tasks: Vec<Task>,
}

/// Task-to-component incidence, one non-empty row per task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QMatrix {
    pub rows: BTreeMap<String, BTreeSet<String>>,
}

impl QMatrix {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, task_id: &str) -> Option<&BTreeSet<String>> {
        self.rows.get(task_id)
    }

    /// Tasks that exercise `kc_id`, in task-id order.
    pub fn tasks_for(&self, kc_id: &str) -> Vec<&str> {
        self.rows
            .iter()
            .filter(|(_, kcs)| kcs.contains(kc_id))
            .map(|(t, _)| t.as_str())
            .collect()
    }
}

pub fn qmatrix(course: &Course) -> QMatrix {
    QMatrix {
        rows: course
            .tasks
            .iter()
            .map(|t| (t.task_id.clone(), t.kc_ids.iter().cloned().collect()))
            .collect(),
    }
}

pub fn get_task<'c>(course: &'c Course, task_id: &str) -> Result<&'c Task> {
    course
        .task(task_id)
        .ok_or_else(|| DomainError::TaskNotFound(task_id.to_string()))
}

impl Course {
    /// Validates the parts and returns the course with tasks in curriculum order.
    pub fn validate(mut self) -> Result<Course> {
        if !is_slug(&self.course_id, false) {
            return Err(DomainError::schema("course_id", "expected a non-empty slug"));
        }
        self.policy_default
            .validate()
            .map_err(|m| DomainError::schema("policy_default", m))?;
        if let Some(exp) = &self.experiment {
            exp.validate()
                .map_err(|m| DomainError::schema("experiment", m))?;
        }

        let mut kc_ids = HashSet::new();
        for (i, kc) in self.kcs.iter().enumerate() {
            if !is_slug(&kc.kc_id, false) {
                return Err(DomainError::schema(
                    format!("kcs[{i}].kc_id"),
                    "expected a non-empty slug of [a-z0-9_-]",
                ));
            }
            if !kc_ids.insert(kc.kc_id.as_str()) {
                return Err(DomainError::DuplicateId(kc.kc_id.clone()));
            }
            if let Some(bkt) = &kc.bkt {
                bkt.validate()
                    .map_err(|e| DomainError::schema(format!("kcs[{i}].bkt"), e.to_string()))?;
            }
            if let Some(pfa) = &kc.pfa {
                pfa.validate()
                    .map_err(|e| DomainError::schema(format!("kcs[{i}].pfa"), e.to_string()))?;
            }
        }

        if self.tasks.is_empty() {
            return Err(DomainError::schema("tasks", "a course needs at least one task"));
        }
        let mut task_ids = HashSet::new();
        let mut indices = HashSet::new();
        let mut referenced = HashSet::new();
        for (i, task) in self.tasks.iter().enumerate() {
            if !is_slug(&task.task_id, true) {
                return Err(DomainError::schema(
                    format!("tasks[{i}].task_id"),
                    "expected a non-empty slug of [A-Za-z0-9_-]",
                ));
            }
            if !task_ids.insert(task.task_id.as_str()) {
                return Err(DomainError::DuplicateId(task.task_id.clone()));
            }
            if task.kc_ids.is_empty() {
                return Err(DomainError::schema(
                    format!("tasks[{i}].kc_ids"),
                    "every task must tag at least one knowledge component",
                ));
            }
            let mut row = HashSet::new();
            for kc in &task.kc_ids {
                if !kc_ids.contains(kc.as_str()) {
                    return Err(DomainError::UnknownKcReference {
                        task_id: task.task_id.clone(),
                        kc_id: kc.clone(),
                    });
                }
                if !row.insert(kc.as_str()) {
                    return Err(DomainError::schema(
                        format!("tasks[{i}].kc_ids"),
                        format!("`{kc}` listed twice"),
                    ));
                }
                referenced.insert(kc.as_str());
            }
            if !(0.0..=1.0).contains(&task.difficulty) {
                return Err(DomainError::DifficultyOutOfRange(task.task_id.clone()));
            }
            if !indices.insert(task.curriculum_index) {
                return Err(DomainError::DuplicateId(format!(
                    "curriculum_index {}",
                    task.curriculum_index
                )));
            }
            if !(MIN_TIME_LIMIT_MS..=MAX_TIME_LIMIT_MS).contains(&task.time_limit_ms) {
                return Err(DomainError::schema(
                    format!("tasks[{i}].time_limit_ms"),
                    format!("must lie in [{MIN_TIME_LIMIT_MS}, {MAX_TIME_LIMIT_MS}]"),
                ));
            }
            if task.memory_limit_kb < MIN_MEMORY_LIMIT_KB {
                return Err(DomainError::schema(
                    format!("tasks[{i}].memory_limit_kb"),
                    format!("must be at least {MIN_MEMORY_LIMIT_KB}"),
                ));
            }
            if task.declared_tests().is_none() {
                return Err(DomainError::schema(
                    format!("tasks[{i}].test_file"),
                    format!("test script lacks a `{TEST_COUNT_DIRECTIVE} <n>` line"),
                ));
            }
        }
        if let Some(i) = self
            .kcs
            .iter()
            .position(|kc| !referenced.contains(kc.kc_id.as_str()))
        {
            return Err(DomainError::schema(
                format!("kcs[{i}]"),
                format!("`{}` is not tagged by any task", self.kcs[i].kc_id),
            ));
        }

        self.tasks.sort_by_key(|t| t.curriculum_index);
        Ok(self)
    }

    pub fn task(&self, task_id: &str) -> Option<&Task> {
        self.tasks.iter().find(|t| t.task_id == task_id)
    }

    pub fn kc(&self, kc_id: &str) -> Option<&KnowledgeComponent> {
        self.kcs.iter().find(|k| k.kc_id == kc_id)
    }

    pub fn bkt_params(&self, kc_id: &str) -> BktParams {
        self.kc(kc_id).and_then(|k| k.bkt).unwrap_or_default()
    }

    pub fn pfa_params(&self, kc_id: &str) -> PfaParams {
        self.kc(kc_id).and_then(|k| k.pfa).unwrap_or_default()
    }

    /// Mean difficulty of the tasks tagging `kc_id`.
    pub fn kc_difficulty(&self, kc_id: &str) -> Option<f64> {
        let diffs: Vec<f64> = self
            .tasks
            .iter()
            .filter(|t| t.kc_ids.iter().any(|k| k == kc_id))
            .map(|t| t.difficulty)
            .collect();
        (!diffs.is_empty()).then(|| diffs.iter().sum::<f64>() / diffs.len() as f64)
    }

    pub fn kc_titles(&self, task: &Task) -> Vec<String> {
        task.kc_ids
            .iter()
            .map(|k| self.kc(k).map(|kc| kc.title.clone()).unwrap_or_else(|| k.clone()))
            .collect()
    }
}

pub(crate) fn is_slug(s: &str, allow_upper: bool) -> bool {
    !s.is_empty()
        && s.chars().all(|c| {
            c.is_ascii_lowercase()
                || c.is_ascii_digit()
                || c == '_'
                || c == '-'
                || (allow_upper && c.is_ascii_uppercase())
        })
}
