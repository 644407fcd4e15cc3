//! HTTP service of the tutoring platform.
//!
//! All routes live under `/api/v1`. Learner routes take
//! `Authorization: Bearer <session token>`; `/admin/*` routes take the
//! operator token from `SCRIPT_ADMIN_TOKEN`. Errors are JSON objects with a
//! machine-readable `code` and a human `message`.

pub mod auth;
pub mod config;
pub mod error;
pub mod handlers;
pub mod state;
pub mod store;

use axum::extract::DefaultBodyLimit;
use axum::http::StatusCode;
use axum::routing::{get, post, put};
use axum::{Json, Router};
use tower_http::timeout::TimeoutLayer;
use tower_http::trace::TraceLayer;

pub use config::Config;
pub use state::AppState;

use handlers::{accounts, admin, learning, research};

/// Largest accepted course package.
pub const MAX_PACKAGE_BYTES: usize = 64 * 1024 * 1024;
/// Largest accepted JSON body elsewhere.
pub const MAX_JSON_BYTES: usize = 4 * 1024 * 1024;

pub fn router(state: AppState) -> Router {
    let timeout = state.config().request_timeout;
    let admin = Router::new()
        .route("/admin/courses", post(admin::upload_course))
        .route("/admin/export", get(admin::export))
        .route("/admin/usernames", get(admin::usernames))
        .layer(DefaultBodyLimit::max(MAX_PACKAGE_BYTES));
    let api = Router::new()
        .route("/health", get(|| async { Json(serde_json::json!({"status": "ok"})) }))
        .route("/register", post(accounts::register))
        .route("/login", post(accounts::login))
        .route("/me/mastery", get(accounts::mastery))
        .route("/courses/{id}/next-task", get(learning::next_task))
        .route("/tasks/{id}", get(learning::get_task))
        .route("/tasks/{id}/snapshot", put(learning::put_snapshot))
        .route("/tasks/{id}/submit", post(learning::submit))
        .route("/tasks/{id}/hint", post(learning::hint))
        .route("/telemetry/batch", post(research::telemetry_batch))
        .route("/consent", post(research::set_consent))
        .layer(DefaultBodyLimit::max(MAX_JSON_BYTES))
        .merge(admin);
    Router::new()
        .nest("/api/v1", api)
        .layer(TimeoutLayer::with_status_code(StatusCode::REQUEST_TIMEOUT, timeout))
        .layer(TraceLayer::new_for_http())
        .with_state(state)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    state: AppState,
    listener: tokio::net::TcpListener,
    shutdown: impl std::future::Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
}
