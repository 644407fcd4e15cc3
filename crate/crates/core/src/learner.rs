//! Knowledge tracing.
//!
//! Mastery is tracked per user and knowledge component with Bayesian
//! knowledge tracing (a two-state hidden Markov model filtered one response
//! at a time). The same state carries success/failure counters so a
//! performance factors analysis (PFA) predictor can be used instead when a
//! course selects it.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{Course, Task};

/// Mastery level at or above which a knowledge component counts as mastered.
pub const DEFAULT_MASTERY_THRESHOLD: f64 = 0.95;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LearnerError {
    #[error("parameter out of domain: {0}")]
    ParamDomain(String),
    #[error("observation has zero likelihood under the current parameters")]
    ZeroLikelihood,
    #[error("unknown knowledge component `{0}`")]
    UnknownKc(String),
    #[error("observation does not tag any knowledge component")]
    EmptyObservation,
}

pub type Result<T, E = LearnerError> = std::result::Result<T, E>;

/// Parameters of a BKT model for one knowledge component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BktParams {
    /// Probability that the skill is mastered before the first response.
    pub p_init: f64,
    /// Probability of learning the skill between two responses.
    pub p_transit: f64,
    /// Probability of answering wrongly despite mastery.
    pub p_slip: f64,
    /// Probability of answering correctly without mastery.
    pub p_guess: f64,
}

impl Default for BktParams {
    fn default() -> Self {
        Self {
            p_init: 0.2,
            p_transit: 0.1,
            p_slip: 0.1,
            p_guess: 0.2,
        }
    }
}

impl BktParams {
    pub fn new(p_init: f64, p_transit: f64, p_slip: f64, p_guess: f64) -> Result<Self> {
        let params = Self {
            p_init,
            p_transit,
            p_slip,
            p_guess,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(LearnerError::ParamDomain(format!("{name}={v} not in [0, 1]")))
            }
        };
        let half_open = |name: &str, v: f64| {
            if (0.0..1.0).contains(&v) {
                Ok(())
            } else {
                Err(LearnerError::ParamDomain(format!("{name}={v} not in [0, 1)")))
            }
        };
        unit("p_init", self.p_init)?;
        unit("p_transit", self.p_transit)?;
        half_open("p_slip", self.p_slip)?;
        half_open("p_guess", self.p_guess)?;
        // A correct answer must be more likely with mastery than without.
        if self.p_slip + self.p_guess >= 1.0 {
            return Err(LearnerError::ParamDomain(format!(
                "p_slip + p_guess = {} must be < 1",
                self.p_slip + self.p_guess
            )));
        }
        Ok(())
    }
}

/// One BKT filtering step: condition mastery on the response, then apply the
/// learning transition.
pub fn bkt_update(mastery: f64, params: &BktParams, correct: bool) -> Result<f64> {
    params.validate()?;
    if !(0.0..=1.0).contains(&mastery) {
        return Err(LearnerError::ParamDomain(format!(
            "mastery={mastery} not in [0, 1]"
        )));
    }
    let (known, unknown) = if correct {
        (mastery * (1.0 - params.p_slip), (1.0 - mastery) * params.p_guess)
    } else {
        (mastery * params.p_slip, (1.0 - mastery) * (1.0 - params.p_guess))
    };
    let evidence = known + unknown;
    if evidence <= 0.0 {
        return Err(LearnerError::ZeroLikelihood);
    }
    let posterior = known / evidence;
    let next = posterior + (1.0 - posterior) * params.p_transit;
    Ok(next.clamp(0.0, 1.0))
}

/// Mastery after each prefix of `observations`, starting from `p_init`.
pub fn bkt_filter(params: &BktParams, observations: &[bool]) -> Result<Vec<f64>> {
    params.validate()?;
    let mut mastery = params.p_init;
    observations
        .iter()
        .map(|&correct| {
            mastery = bkt_update(mastery, params, correct)?;
            Ok(mastery)
        })
        .collect()
}

/// Parameters of the PFA logistic model for one knowledge component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PfaParams {
    /// Easiness of the knowledge component.
    pub beta: f64,
    /// Weight of prior successes, non-negative.
    pub gamma: f64,
    /// Weight of prior failures, non-positive.
    pub rho: f64,
}

impl Default for PfaParams {
    fn default() -> Self {
        Self {
            beta: 0.0,
            gamma: 0.2,
            rho: -0.1,
        }
    }
}

impl PfaParams {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() {
            return Err(LearnerError::ParamDomain("beta must be finite".into()));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(LearnerError::ParamDomain(format!("gamma={} must be >= 0", self.gamma)));
        }
        if !(self.rho <= 0.0 && self.rho.is_finite()) {
            return Err(LearnerError::ParamDomain(format!("rho={} must be <= 0", self.rho)));
        }
        Ok(())
    }
}

/// Success probability under PFA for the knowledge components of one item,
/// given `(params, successes, failures)` per component.
///
/// The result is kept strictly inside (0, 1) even where the logistic
/// saturates in floating point.
pub fn pfa_predict<'a, I>(terms: I) -> f64
where
    I: IntoIterator<Item = (&'a PfaParams, u64, u64)>,
{
    let z: f64 = terms
        .into_iter()
        .map(|(p, s, f)| p.beta + p.gamma * s as f64 + p.rho * f as f64)
        .sum();
    let p = if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)
}

/// Per-user, per-component learner state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkillState {
    pub user_id: String,
    pub kc_id: String,
    pub mastery: f64,
    pub successes: u64,
    pub failures: u64,
    pub updated_at: DateTime<Utc>,
}

/// A graded submission, tagged with the task's Q-matrix row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub user_id: String,
    pub task_id: String,
    pub kc_ids: Vec<String>,
    pub correct: bool,
    pub at: DateTime<Utc>,
}

/// Change of one component's mastery caused by an observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MasteryDelta {
    pub kc_id: String,
    pub before: f64,
    pub after: f64,
}

/// All skill states of one user, keyed by knowledge component.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SkillStates {
    pub user_id: String,
    pub by_kc: BTreeMap<String, SkillState>,
}

impl SkillStates {
    pub fn new(user_id: impl Into<String>) -> Self {
        Self {
            user_id: user_id.into(),
            by_kc: BTreeMap::new(),
        }
    }

    pub fn get(&self, kc_id: &str) -> Option<&SkillState> {
        self.by_kc.get(kc_id)
    }

    /// Current mastery, falling back to the component's prior.
    pub fn mastery(&self, course: &Course, kc_id: &str) -> f64 {
        self.by_kc
            .get(kc_id)
            .map(|s| s.mastery)
            .unwrap_or_else(|| course.bkt_params(kc_id).p_init)
    }

    pub fn counters(&self, kc_id: &str) -> (u64, u64) {
        self.by_kc
            .get(kc_id)
            .map(|s| (s.successes, s.failures))
            .unwrap_or((0, 0))
    }

    pub fn insert(&mut self, state: SkillState) {
        self.by_kc.insert(state.kc_id.clone(), state);
    }
}

/// Applies one observation to every component in its Q-matrix row.
///
/// Either all tagged components are updated or, on error, none is.
pub fn apply_observation(
    states: &mut SkillStates,
    obs: &Observation,
    course: &Course,
) -> Result<Vec<MasteryDelta>> {
    if obs.kc_ids.is_empty() {
        return Err(LearnerError::EmptyObservation);
    }
    let mut staged = Vec::with_capacity(obs.kc_ids.len());
    for kc_id in &obs.kc_ids {
        if course.kc(kc_id).is_none() {
            return Err(LearnerError::UnknownKc(kc_id.clone()));
        }
        let params = course.bkt_params(kc_id);
        let (before, successes, failures) = match states.get(kc_id) {
            Some(s) => (s.mastery, s.successes, s.failures),
            None => (params.p_init, 0, 0),
        };
        let after = bkt_update(before, &params, obs.correct)?;
        let (successes, failures) = if obs.correct {
            (successes + 1, failures)
        } else {
            (successes, failures + 1)
        };
        staged.push((
            MasteryDelta {
                kc_id: kc_id.clone(),
                before,
                after,
            },
            SkillState {
                user_id: obs.user_id.clone(),
                kc_id: kc_id.clone(),
                mastery: after,
                successes,
                failures,
                updated_at: obs.at,
            },
        ));
    }
    Ok(staged
        .into_iter()
        .map(|(delta, state)| {
            states.insert(state);
            delta
        })
        .collect())
}

/// Mean mastery over the task's components, with priors for unseen ones.
pub fn ability_for_task(states: &SkillStates, task: &Task, course: &Course) -> f64 {
    if task.kc_ids.is_empty() {
        return 0.0;
    }
    let total: f64 = task
        .kc_ids
        .iter()
        .map(|kc| states.mastery(course, kc))
        .sum();
    total / task.kc_ids.len() as f64
}

/// Which learner model supplies task-level ability to the outer loop.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TracerKind {
    #[default]
    Bkt,
    Pfa,
}

impl TracerKind {
    /// Task-level ability: mean BKT mastery, or the PFA success prediction.
    pub fn ability(self, states: &SkillStates, task: &Task, course: &Course) -> f64 {
        match self {
            TracerKind::Bkt => ability_for_task(states, task, course),
            TracerKind::Pfa => {
                let params: Vec<PfaParams> =
                    task.kc_ids.iter().map(|kc| course.pfa_params(kc)).collect();
                pfa_predict(task.kc_ids.iter().zip(&params).map(|(kc, p)| {
                    let (s, f) = states.counters(kc);
                    (p, s, f)
                }))
            }
        }
    }
}
