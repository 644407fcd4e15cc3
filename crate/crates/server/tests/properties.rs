//! Property tests for account rules, session keys and the journal store.

use proptest::prelude::*;
use serde_json::json;
use tutor_core::telemetry::{export_vocabulary, Redactor};
use tutor_server::auth::{key_digest, token_digest, token_key, validate_username};
use tutor_server::store::{DocumentStore, FileStore, MemoryStore, Write};

/// Username rules restated directly.
fn acceptable(u: &str) -> bool {
    let slug = u.len() >= 3
        && u.len() <= 32
        && u.bytes().all(|b| b.is_ascii_lowercase() || b.is_ascii_digit() || b == b'_' || b == b'-');
    let letter = u.bytes().any(|b| b.is_ascii_lowercase());
    let label = u.len() >= 2 && (u.starts_with('u') || u.starts_with('s')) && u[1..].bytes().all(|b| b.is_ascii_digit());
    let vocab = export_vocabulary().iter().any(|w| w.contains(u));
    slug && letter && !label && !vocab
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn username_rules_match_the_oracle(u in "[a-z0-9_@.-]{0,6}|[a-z0-9_-]{3,40}|[us][0-9]{1,4}|[A-Za-z ]{3,8}") {
        prop_assert_eq!(validate_username(&u).is_ok(), acceptable(&u), "{}", u);
    }

    #[test]
    fn accepted_usernames_can_always_be_redacted(
        u in "[a-z0-9_-]{3,12}",
        before in "[ -~]{0,20}",
        after in "[ -~]{0,20}",
    ) {
        prop_assume!(validate_username(&u).is_ok());
        let redactor = Redactor::new().with_literals([u.clone()]);
        let text = format!("{before}{u}{after}");
        let out = redactor.redact(&text);
        prop_assert!(!out.contains(&u), "{} survives in {}", u, out);
        prop_assert!(redactor.find_leak(out.as_bytes()).is_none());
    }

    #[test]
    fn session_keys_round_trip(token in "[A-Za-z0-9_-]{43}") {
        prop_assert_eq!(key_digest(&token_key(&token)), Some(token_digest(&token)));
    }

    #[test]
    fn journal_replays_to_the_same_state(
        ops in prop::collection::vec(
            prop::collection::vec((0u8..3, 0u8..5, prop::option::of(any::<i32>())), 1..4),
            0..20,
        )
    ) {
        let dir = tempfile::tempdir().unwrap();
        let memory = MemoryStore::new();
        {
            let file = FileStore::open(dir.path()).unwrap();
            for batch in &ops {
                let writes = || batch.iter().map(|(c, id, v)| {
                    let (c, id) = (format!("c{c}"), format!("d{id}"));
                    match v {
                        Some(v) => Write::put(&c, &id, &json!({"v": v})),
                        None => Write::delete(&c, &id),
                    }
                }).collect::<Vec<_>>();
                file.write(writes()).unwrap();
                memory.write(writes()).unwrap();
            }
        }
        let reopened = FileStore::open(dir.path()).unwrap();
        for c in 0..3 {
            let c = format!("c{c}");
            prop_assert_eq!(reopened.list(&c).unwrap(), memory.list(&c).unwrap());
        }
    }
}

#[test]
fn pieces_of_the_redaction_marker_are_reserved() {
    for u in ["red", "redacted", "dacte", "acted"] {
        assert!(validate_username(u).is_err(), "{u}");
    }
}
