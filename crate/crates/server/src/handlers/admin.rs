//! Operator endpoints, authorised by the admin token.

use std::collections::BTreeSet;

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::{header, StatusCode};
use axum::response::IntoResponse;
use axum::Json;
use chrono::Utc;
use serde::{Deserialize, Serialize};
use tutor_core::domain::load_course_package;
use tutor_core::telemetry::{export_anonymized, ExportOptions, Redactor};

use crate::auth::{key_digest, Admin, UserAccount, SESSIONS, TOKEN_CHARS, USERS};
use crate::error::{ApiError, ApiResult};
use crate::state::AppState;
use crate::store::list_as;

#[derive(Debug, Serialize, Deserialize)]
pub struct UploadSummary {
    pub course_id: String,
    pub title: String,
    pub tasks: usize,
    pub kcs: usize,
    pub message: String,
}

pub async fn upload_course(
    State(state): State<AppState>,
    _admin: Admin,
    body: Bytes,
) -> ApiResult<(StatusCode, Json<UploadSummary>)> {
    let course = tokio::task::spawn_blocking(move || load_course_package(&body))
        .await
        .map_err(|e| ApiError::internal(e.to_string()))??;
    let summary = UploadSummary {
        course_id: course.course_id.clone(),
        title: course.title.clone(),
        tasks: course.tasks.len(),
        kcs: course.kcs.len(),
        message: format!("{} tasks loaded", course.tasks.len()),
    };
    state.install_course(course)?;
    tracing::info!(course_id = %summary.course_id, tasks = summary.tasks, "course installed");
    Ok((StatusCode::CREATED, Json(summary)))
}

/// Every secret an export must not contain: pseudonyms, internal user ids
/// and session tokens (known by digest only).
pub fn redactor(state: &AppState) -> ApiResult<Redactor> {
    let accounts = list_as::<UserAccount>(state.store(), USERS)?;
    let sessions = state.store().list(SESSIONS)?;
    Ok(Redactor::new()
        .with_literals(accounts.into_iter().flat_map(|(_, a)| [a.username, a.user_id]))
        .with_token_hashes(sessions.iter().filter_map(|(k, _)| key_digest(k)), TOKEN_CHARS))
}

#[derive(Debug, Deserialize)]
pub struct ExportQuery {
    pub course_id: Option<String>,
}

pub async fn export(
    State(state): State<AppState>,
    _admin: Admin,
    Query(q): Query<ExportQuery>,
) -> ApiResult<impl IntoResponse> {
    let task_ids = match &q.course_id {
        None => None,
        Some(id) => {
            let course = state
                .course(id)
                .ok_or_else(|| ApiError::not_found("CourseNotFound", format!("course `{id}` not found")))?;
            Some(course.tasks.iter().map(|t| t.task_id.clone()).collect::<BTreeSet<_>>())
        }
    };
    let redactor = redactor(&state)?;
    let events = state.research().all_events().map_err(tutor_core::telemetry::TelemetryError::from)?;
    let options = ExportOptions {
        course_id: q.course_id,
        task_ids,
        exported_at: Utc::now(),
    };
    let archive = tokio::task::spawn_blocking(move || {
        export_anonymized(&events, &options, &redactor, &mut rand::rng())
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
    .map_err(|e| {
        tracing::error!(error = %e, "export refused");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "ExportFailed", e.to_string())
    })?;
    Ok((
        [
            (header::CONTENT_TYPE, "application/zip"),
            (header::CONTENT_DISPOSITION, "attachment; filename=\"research-export.zip\""),
        ],
        archive,
    ))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Usernames {
    pub usernames: Vec<String>,
}

/// Registered pseudonyms, for client-side verification of exports.
pub async fn usernames(State(state): State<AppState>, _admin: Admin) -> ApiResult<Json<Usernames>> {
    let mut usernames: Vec<String> = list_as::<UserAccount>(state.store(), USERS)?
        .into_iter()
        .map(|(_, a)| a.username)
        .collect();
    usernames.sort();
    Ok(Json(Usernames { usernames }))
}
