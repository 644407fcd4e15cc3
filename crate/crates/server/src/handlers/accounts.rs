//! Registration, login and the learner's own mastery overview.

use axum::extract::State;
use axum::http::StatusCode;
use axum::Json;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::json;
use tutor_core::learner::SkillStates;

use crate::auth::{
    new_token, token_key, validate_password, validate_username, CurrentUser, SessionRecord,
    UserAccount, UsernameClaim, SESSIONS, USERNAMES, USERS,
};
use crate::error::{ApiError, ApiResult};
use crate::handlers::research::current_consent;
use crate::state::AppState;
use crate::store::{get_as, put_as, Write};

pub const SKILLS: &str = "skills";

#[derive(Debug, Deserialize)]
pub struct Credentials {
    pub username: String,
    pub password: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RegisteredUser {
    pub user_id: String,
    pub username: String,
    pub created_at: DateTime<Utc>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LoginResponse {
    pub token: String,
    pub user_id: String,
    pub expires_at: DateTime<Utc>,
    pub research_consent: bool,
}

async fn blocking<T: Send + 'static>(f: impl FnOnce() -> T + Send + 'static) -> ApiResult<T> {
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))
}

pub async fn register(
    State(state): State<AppState>,
    Json(req): Json<Credentials>,
) -> ApiResult<(StatusCode, Json<RegisteredUser>)> {
    validate_username(&req.username)?;
    validate_password(&req.password)?;
    let passwords = state.passwords().clone();
    let password = req.password;
    let password_hash = blocking(move || passwords.hash(&password))
        .await?
        .map_err(ApiError::internal)?;
    let user_id = uuid::Uuid::new_v4().simple().to_string();
    let claimed = state.store().insert_new(
        USERNAMES,
        &req.username,
        serde_json::to_value(UsernameClaim { user_id: user_id.clone() }).expect("serialises"),
    )?;
    if !claimed {
        return Err(ApiError::new(StatusCode::CONFLICT, "UsernameTaken", "this username is taken"));
    }
    let account = UserAccount {
        user_id: user_id.clone(),
        username: req.username.clone(),
        password_hash,
        created_at: Utc::now(),
    };
    put_as(state.store(), USERS, &user_id, &account)?;
    Ok((
        StatusCode::CREATED,
        Json(RegisteredUser {
            user_id,
            username: account.username,
            created_at: account.created_at,
        }),
    ))
}

pub async fn login(
    State(state): State<AppState>,
    Json(req): Json<Credentials>,
) -> ApiResult<Json<LoginResponse>> {
    let account = match get_as::<UsernameClaim>(state.store(), USERNAMES, &req.username)? {
        Some(claim) => get_as::<UserAccount>(state.store(), USERS, &claim.user_id)?,
        None => None,
    };
    let passwords = state.passwords().clone();
    let stored = account.as_ref().map(|a| a.password_hash.clone());
    let password = req.password;
    let ok = blocking(move || passwords.verify(&password, stored.as_deref())).await?;
    let account = match (ok, account) {
        (true, Some(a)) => a,
        _ => {
            return Err(ApiError::new(
                StatusCode::UNAUTHORIZED,
                "InvalidCredentials",
                "unknown username or wrong password",
            ))
        }
    };
    let token = new_token();
    let now = Utc::now();
    let ttl = chrono::Duration::from_std(state.config().session_ttl)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    let session = SessionRecord {
        user_id: account.user_id.clone(),
        created_at: now,
        expires_at: now + ttl,
        telemetry_id: uuid::Uuid::new_v4().simple().to_string(),
    };
    state
        .store()
        .write(vec![Write::put(SESSIONS, &token_key(&token), &session)])?;
    let consent = current_consent(&state, &account.user_id)?;
    Ok(Json(LoginResponse {
        token,
        user_id: account.user_id,
        expires_at: session.expires_at,
        research_consent: consent.research_consent,
    }))
}

pub async fn mastery(State(state): State<AppState>, user: CurrentUser) -> ApiResult<Json<serde_json::Value>> {
    let skills: SkillStates =
        get_as(state.store(), SKILLS, &user.user_id)?.unwrap_or_else(|| SkillStates::new(&user.user_id));
    let titles: std::collections::BTreeMap<String, String> = state
        .courses()
        .iter()
        .flat_map(|c| c.kcs.iter().map(|k| (k.kc_id.clone(), k.title.clone())).collect::<Vec<_>>())
        .collect();
    let kcs: Vec<_> = skills
        .by_kc
        .values()
        .map(|s| {
            json!({
                "kc_id": s.kc_id,
                "title": titles.get(&s.kc_id),
                "mastery": s.mastery,
                "successes": s.successes,
                "failures": s.failures,
                "updated_at": s.updated_at,
            })
        })
        .collect();
    Ok(Json(json!({ "user_id": user.user_id, "kcs": kcs })))
}
