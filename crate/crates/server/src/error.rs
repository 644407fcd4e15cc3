//! Structured API errors: an HTTP status plus `{"code", "message"}`.

use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};
use tutor_core::executor::ExecutionError;
use tutor_core::inner_loop::InnerLoopError;
use tutor_core::telemetry::TelemetryError;
use tutor_core::DomainError;

use crate::store::StoreError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: StatusCode,
    pub body: ErrorBody,
}

impl ApiError {
    pub fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
                index: None,
            },
        }
    }

    pub fn bad_request(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, code, message)
    }

    pub fn unauthorized() -> Self {
        Self::new(StatusCode::UNAUTHORIZED, "Unauthorized", "missing, invalid or expired session")
    }

    pub fn not_found(code: &str, message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, code, message)
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, "InternalError", message)
    }

    pub fn code(&self) -> &str {
        &self.body.code
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        tracing::error!(error = %e, "store failure");
        ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "StoreError", "persistence failure")
    }
}

impl From<DomainError> for ApiError {
    fn from(e: DomainError) -> Self {
        let status = match e {
            DomainError::TaskNotFound(_) => StatusCode::NOT_FOUND,
            DomainError::DuplicateId(_) => StatusCode::CONFLICT,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        ApiError::new(status, e.code(), e.to_string())
    }
}

impl From<ExecutionError> for ApiError {
    fn from(e: ExecutionError) -> Self {
        match e {
            ExecutionError::SandboxUnavailable(m) => {
                tracing::warn!(reason = %m, "sandbox unavailable");
                ApiError::new(
                    StatusCode::SERVICE_UNAVAILABLE,
                    "SandboxUnavailable",
                    "code execution is temporarily unavailable",
                )
            }
        }
    }
}

impl From<InnerLoopError> for ApiError {
    fn from(e: InnerLoopError) -> Self {
        let code = match &e {
            InnerLoopError::LlmTimeout => "LlmTimeout",
            InnerLoopError::LlmProtocolError(_) => "LlmProtocolError",
            InnerLoopError::NoCodeBlockInResponse => "NoCodeBlockInResponse",
            InnerLoopError::UnknownPlaceholder(_) => "UnknownPlaceholder",
            InnerLoopError::InnerLoopFailed(_) => "InnerLoopFailed",
        };
        tracing::warn!(error = %e, "hint generation failed");
        ApiError::new(StatusCode::SERVICE_UNAVAILABLE, code, e.to_string())
    }
}

impl From<TelemetryError> for ApiError {
    fn from(e: TelemetryError) -> Self {
        match e {
            TelemetryError::MalformedEvent(index, _) => {
                let mut err = ApiError::bad_request("MalformedEvent", e.to_string());
                err.body.index = Some(index);
                err
            }
            TelemetryError::OffsetOutOfRange(_) => ApiError::bad_request("OffsetOutOfRange", e.to_string()),
            TelemetryError::Store(s) => {
                tracing::error!(error = %s, "research store failure");
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "StoreError", "persistence failure")
            }
        }
    }
}

pub type ApiResult<T> = Result<T, ApiError>;
