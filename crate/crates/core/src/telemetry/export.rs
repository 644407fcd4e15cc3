//! Pseudonymised research export.
//!
//! The archive holds `events.ndjson` (one event per line, user ids replaced
//! by `u1..uN` and session ids by `s1..sM`, both from a fresh random
//! permutation) and `manifest.json`. Every other string value goes through a
//! [`Redactor`]. Entries are stored uncompressed so that the final scrub
//! check over the archive bytes sees the text as written.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use chrono::{DateTime, SecondsFormat, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::{TelemetryEvent, EVENT_KINDS};
use crate::archive::{write_entries_stored, ArchiveError};

pub const EVENTS_FILE: &str = "events.ndjson";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const REDACTED: &str = "[redacted]";

/// Fresh permutations tried before giving up on a chance collision between
/// a secret and the archive's binary headers.
const SCRUB_ATTEMPTS: usize = 8;

#[derive(Debug, Error)]
pub enum ExportError {
    #[error(transparent)]
    Archive(#[from] ArchiveError),
    #[error("export still contains a {0} after redaction")]
    ScrubFailed(&'static str),
}

/// Every fixed string an export can contain besides redacted values. A
/// pseudonym that occurs inside one of these could never be scrubbed.
pub fn export_vocabulary() -> Vec<&'static str> {
    let mut words = vec![
        "user_id",
        "session_id",
        "task_id",
        "at_ms",
        "kind",
        "payload",
        "offset",
        "text",
        "length",
        "overall",
        "hint_id",
        "research_consent",
        "export_time",
        "course_id",
        "record_count",
        "true",
        "false",
        "null",
        REDACTED,
        EVENTS_FILE,
        MANIFEST_FILE,
    ];
    words.extend(EVENT_KINDS);
    words
}

/// Replaces known secrets inside strings.
///
/// Literal secrets (pseudonyms, internal user ids) are matched as substrings.
/// Session tokens are only known by their SHA-256, so every window of
/// `token_len` URL-safe base64 characters is hashed and compared.
#[derive(Debug, Clone, Default)]
pub struct Redactor {
    literals: Vec<String>,
    token_hashes: HashSet<[u8; 32]>,
    token_len: usize,
}

fn is_token_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'-' || b == b'_'
}

impl Redactor {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_literals<I, S>(mut self, literals: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.literals
            .extend(literals.into_iter().map(Into::into).filter(|s: &String| !s.is_empty()));
        // Longer secrets first so a secret containing another is removed whole.
        self.literals.sort_by_key(|s| std::cmp::Reverse(s.len()));
        self.literals.dedup();
        self
    }

    pub fn with_token_hashes<I>(mut self, hashes: I, token_len: usize) -> Self
    where
        I: IntoIterator<Item = [u8; 32]>,
    {
        self.token_hashes.extend(hashes);
        self.token_len = token_len;
        self
    }

    /// Byte ranges of `bytes` that are windows hashing to a known token.
    fn token_ranges(&self, bytes: &[u8]) -> Vec<(usize, usize)> {
        let n = self.token_len;
        if self.token_hashes.is_empty() || n == 0 {
            return Vec::new();
        }
        let mut out = Vec::new();
        let mut i = 0;
        while i < bytes.len() {
            if !is_token_byte(bytes[i]) {
                i += 1;
                continue;
            }
            let start = i;
            while i < bytes.len() && is_token_byte(bytes[i]) {
                i += 1;
            }
            let mut w = start;
            while w + n <= i {
                let digest: [u8; 32] = Sha256::digest(&bytes[w..w + n]).into();
                if self.token_hashes.contains(&digest) {
                    out.push((w, w + n));
                    w += n;
                } else {
                    w += 1;
                }
            }
        }
        out
    }

    pub fn redact(&self, s: &str) -> String {
        let mut out = String::with_capacity(s.len());
        let mut last = 0;
        // Token characters are ASCII, so these ranges are char boundaries.
        for (a, b) in self.token_ranges(s.as_bytes()) {
            out.push_str(&s[last..a]);
            out.push_str(REDACTED);
            last = b;
        }
        out.push_str(&s[last..]);
        for lit in &self.literals {
            if out.contains(lit.as_str()) {
                out = out.replace(lit.as_str(), REDACTED);
            }
        }
        out
    }

    /// What kind of secret, if any, still occurs in `bytes`.
    pub fn find_leak(&self, bytes: &[u8]) -> Option<&'static str> {
        let literal = self
            .literals
            .iter()
            .any(|lit| bytes.windows(lit.len()).any(|w| w == lit.as_bytes()));
        if literal {
            return Some("pseudonym");
        }
        if !self.token_ranges(bytes).is_empty() {
            return Some("session token");
        }
        None
    }
}

#[derive(Debug, Clone)]
pub struct ExportOptions {
    /// Recorded in the manifest.
    pub course_id: Option<String>,
    /// Restricts the export to events on these tasks.
    pub task_ids: Option<BTreeSet<String>>,
    pub exported_at: DateTime<Utc>,
}

fn redact_strings(value: &mut Value, redactor: &Redactor) {
    match value {
        Value::String(s) => *s = redactor.redact(s),
        Value::Array(items) => items.iter_mut().for_each(|v| redact_strings(v, redactor)),
        Value::Object(map) => map.values_mut().for_each(|v| redact_strings(v, redactor)),
        _ => {}
    }
}

/// Numbers `items` 1..=n in a uniformly random order.
fn shuffled_labels<T: Ord + Clone>(items: BTreeSet<T>, rng: &mut impl Rng) -> BTreeMap<T, usize> {
    let mut items: Vec<T> = items.into_iter().collect();
    items.shuffle(rng);
    items.into_iter().enumerate().map(|(i, t)| (t, i + 1)).collect()
}

fn build_archive(
    events: &[&TelemetryEvent],
    options: &ExportOptions,
    redactor: &Redactor,
    rng: &mut impl Rng,
) -> Result<Vec<u8>, ExportError> {
    let users = shuffled_labels(events.iter().map(|e| e.user_id.clone()).collect(), rng);
    let sessions = shuffled_labels(
        events
            .iter()
            .map(|e| (e.user_id.clone(), e.session_id.clone()))
            .collect(),
        rng,
    );

    let mut records: Vec<((usize, usize, i64, usize), Value)> = events
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let u = users[&e.user_id];
            let s = sessions[&(e.user_id.clone(), e.session_id.clone())];
            let mut v = serde_json::to_value(e).expect("events serialise");
            let obj = v.as_object_mut().expect("events serialise to objects");
            obj.remove("user_id");
            obj.remove("session_id");
            redact_strings(&mut v, redactor);
            let obj = v.as_object_mut().expect("still an object");
            obj.insert("user_id".into(), Value::String(format!("u{u}")));
            obj.insert("session_id".into(), Value::String(format!("s{s}")));
            ((u, s, e.at_ms, i), v)
        })
        .collect();
    records.sort_by_key(|r| r.0);

    let mut ndjson = String::new();
    for (_, v) in &records {
        ndjson.push_str(&v.to_string());
        ndjson.push('\n');
    }
    let mut manifest = json!({
        "export_time": options.exported_at.to_rfc3339_opts(SecondsFormat::Secs, true),
        "course_id": options.course_id,
        "record_count": records.len(),
    });
    redact_strings(&mut manifest, redactor);
    let manifest = serde_json::to_vec_pretty(&manifest).expect("manifest serialises");

    Ok(write_entries_stored([
        (EVENTS_FILE, ndjson.as_bytes()),
        (MANIFEST_FILE, manifest.as_slice()),
    ])?)
}

/// Builds the research export archive from `events`.
///
/// The archive bytes are checked against `redactor` before they are
/// returned; a leak is an error, never a silent success.
pub fn export_anonymized(
    events: &[TelemetryEvent],
    options: &ExportOptions,
    redactor: &Redactor,
    rng: &mut impl Rng,
) -> Result<Vec<u8>, ExportError> {
    let selected: Vec<&TelemetryEvent> = events
        .iter()
        .filter(|e| options.task_ids.as_ref().is_none_or(|t| t.contains(&e.task_id)))
        .collect();
    let mut leak = "pseudonym";
    for _ in 0..SCRUB_ATTEMPTS {
        let archive = build_archive(&selected, options, redactor, rng)?;
        match redactor.find_leak(&archive) {
            None => return Ok(archive),
            Some(kind) => leak = kind,
        }
    }
    Err(ExportError::ScrubFailed(leak))
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::archive::read_entries;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    fn options() -> ExportOptions {
        ExportOptions {
            course_id: Some("intro".into()),
            task_ids: None,
            exported_at: "2026-01-02T03:04:05Z".parse().unwrap(),
        }
    }

    fn lines(archive: &[u8]) -> Vec<Value> {
        let entries = read_entries(archive).unwrap();
        String::from_utf8(entries[EVENTS_FILE].clone())
            .unwrap()
            .lines()
            .map(|l| serde_json::from_str(l).unwrap())
            .collect()
    }

    #[test]
    fn pseudonyms_become_labels() {
        let events = vec![
            event("owl42", "sess-a", 0, insert(0, "owl42 was here")),
            event("fox7", "sess-b", 3, insert(0, "x")),
            event("owl42", "sess-a", 9, delete(0, 1)),
        ];
        let redactor = Redactor::new().with_literals(["owl42", "fox7", "sess-a", "sess-b"]);
        let archive =
            export_anonymized(&events, &options(), &redactor, &mut StdRng::seed_from_u64(1)).unwrap();
        assert!(redactor.find_leak(&archive).is_none());
        let records = lines(&archive);
        assert_eq!(records.len(), 3);
        let labels: BTreeSet<_> = records.iter().map(|r| r["user_id"].as_str().unwrap()).collect();
        assert_eq!(labels, BTreeSet::from(["u1", "u2"]));
        let owl = records.iter().find(|r| r["kind"] == "edit_insert" && r["at_ms"] == 0).unwrap();
        assert_eq!(owl["payload"]["text"], "[redacted] was here");
        let manifest: Value =
            serde_json::from_slice(&read_entries(&archive).unwrap()[MANIFEST_FILE]).unwrap();
        assert_eq!(manifest["record_count"], 3);
        assert_eq!(manifest["course_id"], "intro");
        assert_eq!(manifest["export_time"], "2026-01-02T03:04:05Z");
    }

    #[test]
    fn empty_store_has_no_records() {
        let archive =
            export_anonymized(&[], &options(), &Redactor::new(), &mut StdRng::seed_from_u64(0)).unwrap();
        assert!(lines(&archive).is_empty());
    }

    #[test]
    fn task_filter_applies() {
        let mut other = event("a", "s", 1, insert(0, "y"));
        other.task_id = "dice".into();
        let events = vec![event("a", "s", 0, insert(0, "x")), other];
        let opts = ExportOptions {
            task_ids: Some(BTreeSet::from(["dice".to_string()])),
            ..options()
        };
        let archive =
            export_anonymized(&events, &opts, &Redactor::new(), &mut StdRng::seed_from_u64(0)).unwrap();
        let records = lines(&archive);
        assert_eq!(records.len(), 1);
        assert_eq!(records[0]["task_id"], "dice");
    }

    #[test]
    fn tokens_are_found_by_hash() {
        let token = "dGhpcyBpcyBqdXN0IGEgc2FtcGxlIHRva2VuIHZhbHVl";
        let hash: [u8; 32] = Sha256::digest(token.as_bytes()).into();
        let r = Redactor::new().with_token_hashes([hash], token.len());
        assert_eq!(r.redact(&format!("tok={token}!")), "tok=[redacted]!");
        assert_eq!(r.redact(&format!("x{token}")), "x[redacted]");
        assert_eq!(r.redact(&token[1..]), &token[1..]);
        assert_eq!(r.find_leak(format!("a {token} b").as_bytes()), Some("session token"));
        assert_eq!(r.find_leak(b"nothing here"), None);
    }

    #[test]
    fn nested_secrets_are_removed_whole() {
        let r = Redactor::new().with_literals(["owl", "owl42"]);
        assert_eq!(r.redact("owl42 owl"), "[redacted] [redacted]");
    }
}
