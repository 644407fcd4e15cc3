//! Task delivery, submission and hints.

use std::sync::Arc;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::Json;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use tutor_core::executor::{to_observation, ExecutionRequest, ExecutionResult, Overall};
use tutor_core::inner_loop::{run_inner_loop, InnerLoopConfig, PromptContext, PromptTemplates};
use tutor_core::learner::{apply_observation, MasteryDelta, Observation, SkillStates};
use tutor_core::outer_loop::{recommend, resolve_policy};
use tutor_core::telemetry::EventPayload;
use tutor_core::{Course, PolicyKind, ProgressRecord, Task};

use crate::auth::CurrentUser;
use crate::error::{ApiError, ApiResult};
use crate::handlers::accounts::SKILLS;
use crate::handlers::research::{record_server_events, ClientClock};
use crate::handlers::scoped;
use crate::state::AppState;
use crate::store::{get_as, Write};

pub const PROGRESS: &str = "progress";
pub const SNAPSHOTS: &str = "snapshots";
pub const RESULTS: &str = "results";
pub const SUBMISSIONS: &str = "submissions";
pub const HINTS: &str = "hints";

pub const MAX_CODE_BYTES: usize = 256 * 1024;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Snapshot {
    pub code: String,
    pub updated_at: DateTime<Utc>,
}

/// A task as shown to learners; the test script stays on the server.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TaskView {
    pub course_id: String,
    pub task_id: String,
    pub title: String,
    pub description_markdown: String,
    pub starter_code: String,
    pub kc_ids: Vec<String>,
    pub kc_titles: Vec<String>,
    pub difficulty: f64,
    pub curriculum_index: u32,
    pub time_limit_ms: u32,
    pub memory_limit_kb: u32,
    pub declared_tests: u32,
    pub completed: bool,
    /// The learner's latest saved code, if any.
    pub snapshot: Option<String>,
}

fn view(course: &Course, task: &Task, progress: &ProgressRecord, snapshot: Option<Snapshot>) -> TaskView {
    TaskView {
        course_id: course.course_id.clone(),
        task_id: task.task_id.clone(),
        title: task.title.clone(),
        description_markdown: task.description_markdown.clone(),
        starter_code: task.starter_code.clone(),
        kc_ids: task.kc_ids.clone(),
        kc_titles: course.kc_titles(task),
        difficulty: task.difficulty,
        curriculum_index: task.curriculum_index,
        time_limit_ms: task.time_limit_ms,
        memory_limit_kb: task.memory_limit_kb,
        declared_tests: task.declared_tests().unwrap_or(1),
        completed: progress.is_completed(&task.task_id),
        snapshot: snapshot.map(|s| s.code),
    }
}

fn lookup_task(state: &AppState, task_id: &str) -> ApiResult<(Arc<Course>, Task)> {
    let course = state
        .course_of_task(task_id)
        .ok_or_else(|| ApiError::not_found("TaskNotFound", format!("task `{task_id}` not found")))?;
    let task = course.task(task_id).cloned().expect("catalog index is consistent");
    Ok((course, task))
}

fn load_progress(state: &AppState, user_id: &str, course_id: &str) -> ApiResult<ProgressRecord> {
    Ok(get_as(state.store(), PROGRESS, &scoped(user_id, course_id))?
        .unwrap_or_else(|| ProgressRecord::new(user_id)))
}

fn load_skills(state: &AppState, user_id: &str) -> ApiResult<SkillStates> {
    Ok(get_as(state.store(), SKILLS, user_id)?.unwrap_or_else(|| SkillStates::new(user_id)))
}

fn check_code(code: &str) -> ApiResult<()> {
    if code.len() > MAX_CODE_BYTES {
        return Err(ApiError::new(
            StatusCode::PAYLOAD_TOO_LARGE,
            "CodeTooLarge",
            format!("code is limited to {MAX_CODE_BYTES} bytes"),
        ));
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
pub struct NextTaskResponse {
    pub course_id: String,
    pub policy: PolicyKind,
    pub arm: Option<usize>,
    pub course_complete: bool,
    pub task: Option<TaskView>,
}

pub async fn next_task(
    State(state): State<AppState>,
    user: CurrentUser,
    Path(course_id): Path<String>,
) -> ApiResult<Json<NextTaskResponse>> {
    let course = state
        .course(&course_id)
        .ok_or_else(|| ApiError::not_found("CourseNotFound", format!("course `{course_id}` not found")))?;
    let (policy, arm) = resolve_policy(&course, &user.user_id);
    let _guard = state.lock_user(&user.user_id).await;
    let mut progress = load_progress(&state, &user.user_id, &course_id)?;
    let skills = load_skills(&state, &user.user_id)?;
    let task = recommend(&course, &progress, &skills, &policy).cloned();
    let task = match task {
        None => None,
        Some(task) => {
            if progress.in_progress_task_id.as_deref() != Some(task.task_id.as_str()) {
                progress.open(&task.task_id);
                state.store().write(vec![Write::put(
                    PROGRESS,
                    &scoped(&user.user_id, &course_id),
                    &progress,
                )])?;
            }
            let snapshot = get_as(state.store(), SNAPSHOTS, &scoped(&user.user_id, &task.task_id))?;
            Some(view(&course, &task, &progress, snapshot))
        }
    };
    Ok(Json(NextTaskResponse {
        course_id,
        policy: policy.kind,
        arm,
        course_complete: task.is_none(),
        task,
    }))
}

pub async fn get_task(
    State(state): State<AppState>,
    user: CurrentUser,
    Path(task_id): Path<String>,
) -> ApiResult<Json<TaskView>> {
    let (course, task) = lookup_task(&state, &task_id)?;
    let progress = load_progress(&state, &user.user_id, &course.course_id)?;
    let snapshot = get_as(state.store(), SNAPSHOTS, &scoped(&user.user_id, &task_id))?;
    Ok(Json(view(&course, &task, &progress, snapshot)))
}

#[derive(Debug, Deserialize)]
pub struct SnapshotRequest {
    pub code: String,
}

pub async fn put_snapshot(
    State(state): State<AppState>,
    user: CurrentUser,
    Path(task_id): Path<String>,
    Json(req): Json<SnapshotRequest>,
) -> ApiResult<Json<Snapshot>> {
    lookup_task(&state, &task_id)?;
    check_code(&req.code)?;
    let snapshot = Snapshot {
        code: req.code,
        updated_at: Utc::now(),
    };
    state.store().write(vec![Write::put(
        SNAPSHOTS,
        &scoped(&user.user_id, &task_id),
        &snapshot,
    )])?;
    Ok(Json(snapshot))
}

#[derive(Debug, Deserialize)]
pub struct SubmitRequest {
    pub code: String,
    #[serde(flatten)]
    pub clock: ClientClock,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub result: ExecutionResult,
    pub feedback: String,
    /// Empty when the run produced no observation.
    pub mastery: Vec<MasteryDelta>,
    pub task_completed: bool,
}

/// Runs the code, then updates learner state under the user's lock. The
/// execution itself happens outside the lock. Infrastructure failures leave
/// mastery untouched.
pub async fn submit(
    State(state): State<AppState>,
    user: CurrentUser,
    Path(task_id): Path<String>,
    Json(req): Json<SubmitRequest>,
) -> ApiResult<Json<SubmitResponse>> {
    let (course, task) = lookup_task(&state, &task_id)?;
    check_code(&req.code)?;
    let key = scoped(&user.user_id, &task_id);
    let snapshot = Snapshot {
        code: req.code.clone(),
        updated_at: Utc::now(),
    };
    state.store().write(vec![Write::put(SNAPSHOTS, &key, &snapshot)])?;

    let result = state
        .executor()
        .run(&ExecutionRequest::for_task(&task, &req.code))
        .await?;
    let feedback = result.feedback_summary();
    if result.overall == Overall::SandboxError {
        return Ok(Json(SubmitResponse {
            result,
            feedback,
            mastery: Vec::new(),
            task_completed: false,
        }));
    }

    let correct = to_observation(&result);
    let (deltas, newly_completed) = {
        let _guard = state.lock_user(&user.user_id).await;
        let mut skills = load_skills(&state, &user.user_id)?;
        let mut progress = load_progress(&state, &user.user_id, &course.course_id)?;
        let observation = Observation {
            user_id: user.user_id.clone(),
            task_id: task_id.clone(),
            kc_ids: task.kc_ids.clone(),
            correct,
            at: Utc::now(),
        };
        let deltas = apply_observation(&mut skills, &observation, &course)
            .map_err(|e| ApiError::internal(e.to_string()))?;
        let newly_completed = correct && !progress.is_completed(&task_id);
        if newly_completed {
            progress.complete(&task_id);
        }
        state.store().write(vec![
            Write::put(SKILLS, &user.user_id, &skills),
            Write::put(PROGRESS, &scoped(&user.user_id, &course.course_id), &progress),
            Write::put(RESULTS, &key, &result),
            Write::put(
                SUBMISSIONS,
                &uuid::Uuid::new_v4().simple().to_string(),
                &serde_json::json!({
                    "user_id": user.user_id,
                    "task_id": task_id,
                    "overall": result.overall,
                    "passed": result.passed(),
                    "at": observation.at,
                }),
            ),
        ])?;
        (deltas, newly_completed)
    };

    let mut events = vec![EventPayload::Submit {
        overall: Some(format!("{:?}", result.overall)),
    }];
    if newly_completed {
        events.push(EventPayload::TaskComplete {});
    }
    record_server_events(&state, &user, &task_id, &req.clock, events).await;

    Ok(Json(SubmitResponse {
        result,
        feedback,
        mastery: deltas,
        task_completed: correct,
    }))
}

#[derive(Debug, Default, Deserialize)]
pub struct HintRequest {
    #[serde(flatten)]
    pub clock: ClientClock,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct HintResponse {
    pub hint_id: String,
    pub text: String,
    pub masked: bool,
    pub certainty: f64,
    pub revised: bool,
    pub created_at: DateTime<Utc>,
}

pub async fn hint(
    State(state): State<AppState>,
    user: CurrentUser,
    Path(task_id): Path<String>,
    body: Option<Json<HintRequest>>,
) -> ApiResult<Json<HintResponse>> {
    let req = body.map(|Json(b)| b).unwrap_or_default();
    let (course, task) = lookup_task(&state, &task_id)?;
    let key = scoped(&user.user_id, &task_id);
    let snapshot: Snapshot = get_as(state.store(), SNAPSHOTS, &key)?.ok_or_else(|| {
        ApiError::new(
            StatusCode::CONFLICT,
            "NoSnapshot",
            "save or submit code before asking for a hint",
        )
    })?;
    let last: Option<ExecutionResult> = get_as(state.store(), RESULTS, &key)?;
    let ctx = PromptContext {
        task_description: task.description_markdown.clone(),
        starter_code: task.starter_code.clone(),
        current_code: snapshot.code,
        last_execution_feedback: last
            .map(|r| r.feedback_summary())
            .unwrap_or_else(|| "The code has not been run yet.".into()),
        kc_titles: course.kc_titles(&task),
    };
    let llm = &state.config().llm;
    let config = InnerLoopConfig {
        templates: PromptTemplates::with_overrides(&course.prompts),
        temperature: llm.temperature,
        max_output_tokens: llm.max_output_tokens,
        request_timeout: llm.timeout,
        ..InnerLoopConfig::default()
    };
    record_server_events(&state, &user, &task_id, &req.clock, vec![EventPayload::HintRequest {}]).await;
    let outcome = run_inner_loop(&ctx, state.llm(), &config).await?;

    let hint_id = uuid::Uuid::new_v4().simple().to_string();
    state.store().write(vec![Write::put(
        HINTS,
        &hint_id,
        &serde_json::json!({
            "user_id": user.user_id,
            "task_id": task_id,
            "hint": outcome.hint,
            "certainty_report": outcome.report,
        }),
    )])?;
    record_server_events(
        &state,
        &user,
        &task_id,
        &req.clock,
        vec![EventPayload::HintShown { hint_id: hint_id.clone() }],
    )
    .await;
    let h = outcome.hint;
    Ok(Json(HintResponse {
        hint_id,
        text: h.text,
        masked: h.masked,
        certainty: h.certainty,
        revised: h.revised,
        created_at: h.created_at,
    }))
}
