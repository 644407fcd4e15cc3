//! Research consent and telemetry ingestion.

use axum::extract::State;
use axum::Json;
use chrono::Utc;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tutor_core::telemetry::{record_batch, ConsentRecord, EventPayload, TelemetryError, TelemetryEvent};

use crate::auth::CurrentUser;
use crate::error::ApiResult;
use crate::handlers::scoped;
use crate::state::AppState;
use crate::store::{get_as, Write};

pub const CONSENT: &str = "consent";
pub const CONSENT_LOG: &str = "consent_log";
/// Operational event log; never exported for research.
pub const EVENTS: &str = "events";

/// The user's consent in effect; off until they opt in.
pub fn current_consent(state: &AppState, user_id: &str) -> ApiResult<ConsentRecord> {
    Ok(get_as(state.store(), CONSENT, user_id)?.unwrap_or(ConsentRecord {
        user_id: user_id.to_string(),
        research_consent: false,
        changed_at: Utc::now(),
    }))
}

#[derive(Debug, Deserialize)]
pub struct ConsentRequest {
    pub research_consent: bool,
}

pub async fn set_consent(
    State(state): State<AppState>,
    user: CurrentUser,
    Json(req): Json<ConsentRequest>,
) -> ApiResult<Json<ConsentRecord>> {
    let _guard = state.lock_user(&user.user_id).await;
    let record = ConsentRecord {
        user_id: user.user_id.clone(),
        research_consent: req.research_consent,
        changed_at: Utc::now(),
    };
    let entry = uuid::Uuid::new_v4().simple().to_string();
    state.store().write(vec![
        Write::put(CONSENT, &user.user_id, &record),
        Write::put(CONSENT_LOG, &scoped(&user.user_id, &entry), &record),
        Write::put(
            EVENTS,
            &entry,
            &json!({
                "user_id": user.user_id,
                "kind": "consent_change",
                "research_consent": record.research_consent,
                "at": record.changed_at,
            }),
        ),
    ])?;
    Ok(Json(record))
}

#[derive(Debug, Deserialize)]
pub struct BatchRequest {
    pub events: Vec<Value>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BatchResponse {
    pub accepted: usize,
}

/// Stores a client batch only if consent is on when it arrives. The consent
/// read and the write happen under the user's lock, so a concurrent consent
/// change either precedes or follows the whole batch.
pub async fn telemetry_batch(
    State(state): State<AppState>,
    user: CurrentUser,
    Json(req): Json<BatchRequest>,
) -> ApiResult<Json<BatchResponse>> {
    let _guard = state.lock_user(&user.user_id).await;
    let consent = current_consent(&state, &user.user_id)?;
    if !consent.research_consent {
        return Ok(Json(BatchResponse { accepted: 0 }));
    }
    let events = req
        .events
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            serde_json::from_value::<TelemetryEvent>(v)
                .map_err(|e| TelemetryError::MalformedEvent(i, e.to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let accepted = record_batch(state.research(), &events, &consent)?;
    Ok(Json(BatchResponse { accepted }))
}

/// Where server-recorded events are placed on the client's timeline.
#[derive(Debug, Clone, Default, Deserialize)]
pub struct ClientClock {
    /// Client telemetry session; defaults to one per login.
    pub telemetry_session_id: Option<String>,
    /// Client-relative time; defaults to milliseconds since login.
    pub at_ms: Option<i64>,
}

/// Records events produced by the server for `user`, subject to consent.
/// Failures are logged, not returned: they must not undo the action that
/// produced the events.
pub async fn record_server_events(
    state: &AppState,
    user: &CurrentUser,
    task_id: &str,
    clock: &ClientClock,
    payloads: Vec<EventPayload>,
) {
    let session_id = clock
        .telemetry_session_id
        .clone()
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| user.session.telemetry_id.clone());
    let at_ms = clock
        .at_ms
        .filter(|&t| t >= 0)
        .unwrap_or_else(|| (Utc::now() - user.session.created_at).num_milliseconds().max(0));
    let events: Vec<TelemetryEvent> = payloads
        .into_iter()
        .map(|payload| TelemetryEvent {
            user_id: user.user_id.clone(),
            session_id: session_id.clone(),
            task_id: task_id.to_string(),
            at_ms,
            payload,
        })
        .collect();
    let _guard = state.lock_user(&user.user_id).await;
    let result = current_consent(state, &user.user_id)
        .map_err(|e| e.body.message)
        .and_then(|consent| record_batch(state.research(), &events, &consent).map_err(|e| e.to_string()));
    if let Err(e) = result {
        tracing::warn!(error = %e, "server-side telemetry not recorded");
    }
}

