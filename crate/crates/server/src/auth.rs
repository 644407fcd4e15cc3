//! Pseudonymous accounts, password hashing and bearer sessions.

use std::sync::Arc;

use argon2::{Algorithm, Argon2, Params, PasswordHasher, PasswordVerifier, Version};
use axum::extract::FromRequestParts;
use axum::http::request::Parts;
use axum::http::{header, StatusCode};
use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use subtle::ConstantTimeEq;
use tutor_core::telemetry::export_vocabulary;

use crate::error::ApiError;
use crate::state::AppState;
use crate::store::get_as;

pub const USERS: &str = "users";
pub const USERNAMES: &str = "usernames";
pub const SESSIONS: &str = "sessions";

pub const MIN_PASSWORD_CHARS: usize = 10;
pub const MAX_PASSWORD_BYTES: usize = 1024;
pub const TOKEN_BYTES: usize = 32;
/// Length of an encoded session token.
pub const TOKEN_CHARS: usize = 43;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserAccount {
    pub user_id: String,
    pub username: String,
    pub password_hash: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UsernameClaim {
    pub user_id: String,
}

/// Stored under the SHA-256 of its token; the token itself is never stored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub user_id: String,
    pub created_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
    /// Session id used for events the server records on the user's behalf.
    pub telemetry_id: String,
}

/// Checks a requested pseudonym.
///
/// Beyond the 3–32 lowercase slug rule, a pseudonym must contain a letter,
/// must not look like an export label (`u12`, `s3`) and must not occur
/// inside the fixed vocabulary of a research export. Together these
/// guarantee that redaction can always remove it from an export.
pub fn validate_username(username: &str) -> Result<(), ApiError> {
    if username.contains('@') {
        return Err(ApiError::bad_request(
            "EmailLikeUsername",
            "usernames must be pseudonyms, not e-mail addresses",
        ));
    }
    let invalid = |why: &str| Err(ApiError::bad_request("InvalidUsername", why));
    let len = username.chars().count();
    if !(3..=32).contains(&len) {
        return invalid("usernames have 3 to 32 characters");
    }
    if !username
        .chars()
        .all(|c| c.is_ascii_lowercase() || c.is_ascii_digit() || c == '_' || c == '-')
    {
        return invalid("usernames use only a-z, 0-9, `_` and `-`");
    }
    if !username.chars().any(|c| c.is_ascii_lowercase()) {
        return invalid("usernames contain at least one letter");
    }
    let mut chars = username.chars();
    if matches!(chars.next(), Some('u' | 's')) && chars.all(|c| c.is_ascii_digit()) {
        return invalid("this username is reserved");
    }
    if export_vocabulary().iter().any(|w| w.contains(username)) {
        return invalid("this username is reserved");
    }
    Ok(())
}

pub fn validate_password(password: &str) -> Result<(), ApiError> {
    if password.chars().count() < MIN_PASSWORD_CHARS {
        return Err(ApiError::bad_request(
            "WeakPassword",
            format!("passwords have at least {MIN_PASSWORD_CHARS} characters"),
        ));
    }
    if password.len() > MAX_PASSWORD_BYTES {
        return Err(ApiError::bad_request("WeakPassword", "password is too long"));
    }
    Ok(())
}

/// Argon2id hashing with a precomputed dummy hash, so that logins for
/// unknown users cost the same as logins with a wrong password.
#[derive(Clone)]
pub struct Passwords {
    params: Params,
    dummy_hash: Arc<str>,
}

impl Passwords {
    pub fn new(memory_kib: u32, iterations: u32) -> Result<Self, String> {
        let params = Params::new(memory_kib, iterations, 1, None).map_err(|e| e.to_string())?;
        let mut p = Self {
            params,
            dummy_hash: Arc::from(""),
        };
        p.dummy_hash = Arc::from(p.hash("dummy password for unknown users")?);
        Ok(p)
    }

    fn argon2(&self) -> Argon2<'static> {
        Argon2::new(Algorithm::Argon2id, Version::V0x13, self.params.clone())
    }

    pub fn hash(&self, password: &str) -> Result<String, String> {
        let mut salt = [0u8; 16];
        rand::rng().fill_bytes(&mut salt);
        self.argon2()
            .hash_password_with_salt(password.as_bytes(), &salt)
            .map(|h| h.to_string())
            .map_err(|e| e.to_string())
    }

    /// Verifies against `stored`, or against the dummy hash when `None`,
    /// which always fails.
    pub fn verify(&self, password: &str, stored: Option<&str>) -> bool {
        let hash = stored.unwrap_or(&self.dummy_hash);
        let ok = PasswordVerifier::<str>::verify_password(&self.argon2(), password.as_bytes(), hash).is_ok();
        ok && stored.is_some()
    }
}

pub fn new_token() -> String {
    let mut bytes = [0u8; TOKEN_BYTES];
    rand::rng().fill_bytes(&mut bytes);
    URL_SAFE_NO_PAD.encode(bytes)
}

pub fn token_digest(token: &str) -> [u8; 32] {
    Sha256::digest(token.as_bytes()).into()
}

pub fn token_key(token: &str) -> String {
    token_digest(token).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn key_digest(key: &str) -> Option<[u8; 32]> {
    if key.len() != 64 {
        return None;
    }
    let mut out = [0u8; 32];
    for (i, byte) in out.iter_mut().enumerate() {
        *byte = u8::from_str_radix(key.get(2 * i..2 * i + 2)?, 16).ok()?;
    }
    Some(out)
}

fn bearer(parts: &Parts) -> Option<&str> {
    parts
        .headers
        .get(header::AUTHORIZATION)?
        .to_str()
        .ok()?
        .strip_prefix("Bearer ")
        .map(str::trim)
}

/// A request authenticated by a live session.
#[derive(Debug, Clone)]
pub struct CurrentUser {
    pub user_id: String,
    pub session: SessionRecord,
}

impl FromRequestParts<AppState> for CurrentUser {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let token = bearer(parts).ok_or_else(ApiError::unauthorized)?;
        if token.len() != TOKEN_CHARS {
            return Err(ApiError::unauthorized());
        }
        let session: SessionRecord = get_as(state.store(), SESSIONS, &token_key(token))?
            .ok_or_else(ApiError::unauthorized)?;
        if session.expires_at <= Utc::now() {
            return Err(ApiError::unauthorized());
        }
        Ok(CurrentUser {
            user_id: session.user_id.clone(),
            session,
        })
    }
}

/// A request carrying the operator token.
#[derive(Debug, Clone, Copy)]
pub struct Admin;

impl FromRequestParts<AppState> for Admin {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &AppState) -> Result<Self, Self::Rejection> {
        let forbidden = || ApiError::new(StatusCode::FORBIDDEN, "Forbidden", "admin token required");
        let expected = state.config().admin_token.as_deref().ok_or_else(forbidden)?;
        let given = bearer(parts).ok_or_else(forbidden)?;
        let equal: bool = Sha256::digest(given.as_bytes())
            .ct_eq(&Sha256::digest(expected.as_bytes()))
            .into();
        if equal {
            Ok(Admin)
        } else {
            Err(forbidden())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn username_rules() {
        assert!(validate_username("owl42").is_ok());
        assert!(validate_username("fox-7_a").is_ok());
        assert_eq!(validate_username("a@b.de").unwrap_err().code(), "EmailLikeUsername");
        for bad in ["ab", "Owl42", "owl 42", "12345", "u12", "s3", "kind", "edit", "redacted", "a".repeat(33).as_str()] {
            assert_eq!(validate_username(bad).unwrap_err().code(), "InvalidUsername", "{bad}");
        }
        assert!(validate_username("u12x").is_ok());
    }

    #[test]
    fn password_rules() {
        assert!(validate_password("correct-horse-17").is_ok());
        assert_eq!(validate_password("short").unwrap_err().code(), "WeakPassword");
    }

    #[test]
    fn hashing_round_trip() {
        let p = Passwords::new(1024, 1).unwrap();
        let h = p.hash("correct-horse-17").unwrap();
        assert!(h.starts_with("$argon2id$"));
        assert!(p.verify("correct-horse-17", Some(&h)));
        assert!(!p.verify("wrong-horse-17", Some(&h)));
        assert!(!p.verify("dummy password for unknown users", None));
        assert_ne!(h, p.hash("correct-horse-17").unwrap(), "salts differ");
    }

    #[test]
    fn tokens() {
        let t = new_token();
        assert_eq!(t.len(), TOKEN_CHARS);
        assert!(t.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'-' || b == b'_'));
        assert_ne!(t, new_token());
        assert_eq!(key_digest(&token_key(&t)), Some(token_digest(&t)));
        assert_eq!(key_digest("zz"), None);
    }
}
