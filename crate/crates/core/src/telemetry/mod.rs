//! Consent-gated research telemetry.
//!
//! Events carry client-relative timestamps only. They are written to a
//! [`ResearchStore`] that is kept apart from operational data, and only while
//! the learner's research consent is on. [`export_anonymized`] turns the store
//! into a pseudonymised archive.

mod export;
mod store;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use export::{
    export_anonymized, export_vocabulary, ExportError, ExportOptions, Redactor, EVENTS_FILE,
    MANIFEST_FILE, REDACTED,
};
pub use store::{FileResearchStore, MemoryResearchStore, ResearchStore, StoreError};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TelemetryError {
    #[error("event {0} is malformed: {1}")]
    MalformedEvent(usize, String),
    #[error("edit at event {0} is outside the buffer")]
    OffsetOutOfRange(usize),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Kind-specific part of an event. Offsets and lengths count characters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "payload", rename_all = "snake_case")]
pub enum EventPayload {
    EditInsert { offset: u64, text: String },
    EditDelete { offset: u64, length: u64 },
    CursorMove { offset: u64 },
    Run {},
    Submit {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        overall: Option<String>,
    },
    HintRequest {},
    HintShown { hint_id: String },
    TaskOpen {},
    TaskComplete {},
    ConsentChange { research_consent: bool },
}

impl EventPayload {
    pub fn kind(&self) -> &'static str {
        match self {
            EventPayload::EditInsert { .. } => "edit_insert",
            EventPayload::EditDelete { .. } => "edit_delete",
            EventPayload::CursorMove { .. } => "cursor_move",
            EventPayload::Run {} => "run",
            EventPayload::Submit { .. } => "submit",
            EventPayload::HintRequest {} => "hint_request",
            EventPayload::HintShown { .. } => "hint_shown",
            EventPayload::TaskOpen {} => "task_open",
            EventPayload::TaskComplete {} => "task_complete",
            EventPayload::ConsentChange { .. } => "consent_change",
        }
    }
}

pub const EVENT_KINDS: [&str; 10] = [
    "edit_insert",
    "edit_delete",
    "cursor_move",
    "run",
    "submit",
    "hint_request",
    "hint_shown",
    "task_open",
    "task_complete",
    "consent_change",
];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TelemetryEvent {
    pub user_id: String,
    pub session_id: String,
    pub task_id: String,
    /// Milliseconds since the client session started.
    pub at_ms: i64,
    #[serde(flatten)]
    pub payload: EventPayload,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsentRecord {
    pub user_id: String,
    pub research_consent: bool,
    pub changed_at: DateTime<Utc>,
}

/// Checks a batch without storing it: every event must have `at_ms >= 0`,
/// non-empty ids, and the same user and session as the first event.
pub fn validate_batch(events: &[TelemetryEvent]) -> Result<(), TelemetryError> {
    let Some(first) = events.first() else {
        return Ok(());
    };
    for (i, e) in events.iter().enumerate() {
        let problem = if e.at_ms < 0 {
            Some("negative at_ms")
        } else if e.user_id.is_empty() || e.session_id.is_empty() || e.task_id.is_empty() {
            Some("empty identifier")
        } else if e.user_id != first.user_id || e.session_id != first.session_id {
            Some("batch mixes users or sessions")
        } else {
            None
        };
        if let Some(p) = problem {
            return Err(TelemetryError::MalformedEvent(i, p.into()));
        }
    }
    Ok(())
}

/// Stores a batch if and only if `consent` allows it.
///
/// Without consent nothing is inspected or stored and the result is 0. With
/// consent the batch is validated and stored as a whole, or not at all.
pub fn record_batch(
    store: &dyn ResearchStore,
    events: &[TelemetryEvent],
    consent: &ConsentRecord,
) -> Result<usize, TelemetryError> {
    if !consent.research_consent {
        return Ok(0);
    }
    validate_batch(events)?;
    if let Some(i) = events.iter().position(|e| e.user_id != consent.user_id) {
        return Err(TelemetryError::MalformedEvent(i, "consent belongs to another user".into()));
    }
    if events.is_empty() {
        return Ok(0);
    }
    store.append(events)?;
    Ok(events.len())
}

/// Applies the edit events in order to an empty buffer. Other kinds are
/// skipped.
pub fn replay_buffer(events: &[TelemetryEvent]) -> Result<String, TelemetryError> {
    let mut buf: Vec<char> = Vec::new();
    for (i, e) in events.iter().enumerate() {
        match &e.payload {
            EventPayload::EditInsert { offset, text } => {
                let at = usize::try_from(*offset)
                    .ok()
                    .filter(|&o| o <= buf.len())
                    .ok_or(TelemetryError::OffsetOutOfRange(i))?;
                buf.splice(at..at, text.chars());
            }
            EventPayload::EditDelete { offset, length } => {
                let range = usize::try_from(*offset)
                    .ok()
                    .zip(usize::try_from(*length).ok())
                    .and_then(|(o, l)| Some(o..o.checked_add(l)?))
                    .filter(|r| r.end <= buf.len())
                    .ok_or(TelemetryError::OffsetOutOfRange(i))?;
                buf.drain(range);
            }
            _ => {}
        }
    }
    Ok(buf.into_iter().collect())
}


#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    fn edits(payloads: Vec<EventPayload>) -> Vec<TelemetryEvent> {
        payloads
            .into_iter()
            .enumerate()
            .map(|(i, p)| event("u", "s", i as i64, p))
            .collect()
    }

    #[test]
    fn replay_examples() {
        assert_eq!(replay_buffer(&edits(vec![insert(0, "ab"), insert(1, "X")])).unwrap(), "aXb");
        assert_eq!(replay_buffer(&[]).unwrap(), "");
        assert_eq!(replay_buffer(&edits(vec![insert(0, "a"), delete(0, 1)])).unwrap(), "");
    }

    #[test]
    fn replay_counts_characters() {
        let ev = edits(vec![insert(0, "äöü"), insert(3, "!"), delete(1, 1)]);
        assert_eq!(replay_buffer(&ev).unwrap(), "äü!");
    }

    #[test]
    fn replay_rejects_out_of_range() {
        let ev = edits(vec![insert(0, "ab"), insert(3, "x")]);
        assert_eq!(replay_buffer(&ev), Err(TelemetryError::OffsetOutOfRange(1)));
        let ev = edits(vec![insert(0, "ab"), delete(1, 2)]);
        assert_eq!(replay_buffer(&ev), Err(TelemetryError::OffsetOutOfRange(1)));
        let ev = edits(vec![delete(u64::MAX, u64::MAX)]);
        assert_eq!(replay_buffer(&ev), Err(TelemetryError::OffsetOutOfRange(0)));
    }

    fn ten_edits() -> Vec<TelemetryEvent> {
        (0..10).map(|i| event("owl", "s1", i * 10, insert(i as u64, "x"))).collect()
    }

    #[test]
    fn consent_gates_storage() {
        let store = MemoryResearchStore::default();
        assert_eq!(record_batch(&store, &ten_edits(), &consent("owl", false)).unwrap(), 0);
        assert!(store.all_events().unwrap().is_empty());
        assert_eq!(record_batch(&store, &ten_edits(), &consent("owl", true)).unwrap(), 10);
        assert_eq!(store.all_events().unwrap().len(), 10);
    }

    #[test]
    fn malformed_batches_store_nothing() {
        let store = MemoryResearchStore::default();
        let mut batch = ten_edits();
        batch[4].at_ms = -1;
        let err = record_batch(&store, &batch, &consent("owl", true)).unwrap_err();
        assert!(matches!(err, TelemetryError::MalformedEvent(4, _)));
        let mut batch = ten_edits();
        batch[7].session_id = "other".into();
        assert!(matches!(
            record_batch(&store, &batch, &consent("owl", true)),
            Err(TelemetryError::MalformedEvent(7, _))
        ));
        assert!(matches!(
            record_batch(&store, &ten_edits(), &consent("fox", true)),
            Err(TelemetryError::MalformedEvent(0, _))
        ));
        assert!(store.all_events().unwrap().is_empty());
    }

    #[test]
    fn wire_format() {
        let e = event("u", "s", 5, insert(2, "hi"));
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(
            v,
            serde_json::json!({"user_id":"u","session_id":"s","task_id":"bayes","at_ms":5,
                "kind":"edit_insert","payload":{"offset":2,"text":"hi"}})
        );
        let run: TelemetryEvent = serde_json::from_str(
            r#"{"user_id":"u","session_id":"s","task_id":"t","at_ms":0,"kind":"run","payload":{}}"#,
        )
        .unwrap();
        assert_eq!(run.payload, EventPayload::Run {});
        for kind in EVENT_KINDS {
            let payload = match kind {
                "edit_insert" => r#"{"offset":0,"text":""}"#,
                "edit_delete" => r#"{"offset":0,"length":0}"#,
                "cursor_move" => r#"{"offset":0}"#,
                "hint_shown" => r#"{"hint_id":"h"}"#,
                "consent_change" => r#"{"research_consent":true}"#,
                _ => "{}",
            };
            let raw = format!(
                r#"{{"user_id":"u","session_id":"s","task_id":"t","at_ms":0,"kind":"{kind}","payload":{payload}}}"#
            );
            let e: TelemetryEvent = serde_json::from_str(&raw).unwrap();
            assert_eq!(e.payload.kind(), kind);
        }
    }
}
