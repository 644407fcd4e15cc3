//! Core models of the tutoring service.
//!
//! The crate follows the classic four-model split of an intelligent tutoring
//! system. [`domain`] owns courses, tasks and the Q-matrix, [`learner`] tracks
//! per-skill mastery, [`outer_loop`] picks the next task and [`inner_loop`]
//! turns a predicted next program state into a hint. [`executor`] runs learner
//! code out of process and [`telemetry`] handles consent-gated research events.

pub mod archive;
pub mod domain;
pub mod executor;
pub mod hash;
pub mod inner_loop;
pub mod learner;
pub mod outer_loop;
pub mod telemetry;

pub use domain::{Course, DomainError, KnowledgeComponent, QMatrix, Task};
pub use learner::{BktParams, LearnerError, PfaParams, SkillState, TracerKind};
pub use outer_loop::{ExperimentConfig, PolicyConfig, PolicyKind, ProgressRecord};
