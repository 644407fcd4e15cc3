//! Client side of the operator endpoints.
//!
//! Exit codes are part of the interface: 0 on success, 1 when the input or
//! the result is rejected (validation error, failed scrub check, missing
//! token, bad arguments), 2 when the service cannot be reached or fails.

use std::path::{Path, PathBuf};

use reqwest::StatusCode;
use serde::Deserialize;
use thiserror::Error;
use tutor_core::archive::read_entries;
use tutor_core::domain::pack_dir;

/// Environment variable holding the operator token.
pub const TOKEN_VAR: &str = "SCRIPT_ADMIN_TOKEN";

#[derive(Debug, Error)]
pub enum CtlError {
    /// The server refused the request; carries its message verbatim.
    #[error("{0}")]
    Rejected(String),
    #[error("ScrubCheckFailed: {0}")]
    ScrubCheckFailed(String),
    #[error("{0}")]
    Usage(String),
    #[error("transport error: {0}")]
    Transport(String),
    #[error("server error: {0}")]
    Server(String),
}

impl CtlError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CtlError::Rejected(_) | CtlError::ScrubCheckFailed(_) | CtlError::Usage(_) => 1,
            CtlError::Transport(_) | CtlError::Server(_) => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct UploadSummary {
    pub course_id: String,
    pub title: String,
    pub tasks: usize,
    pub kcs: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExportSummary {
    pub path: PathBuf,
    pub bytes: usize,
    pub records: usize,
}

#[derive(Deserialize)]
struct ErrorBody {
    code: Option<String>,
    message: Option<String>,
}

#[derive(Deserialize)]
struct Usernames {
    usernames: Vec<String>,
}

pub struct Client {
    http: reqwest::Client,
    endpoint: String,
    token: String,
}

fn api_url(endpoint: &str, path: &str) -> String {
    let base = endpoint.trim_end_matches('/');
    if base.ends_with("/api/v1") {
        format!("{base}{path}")
    } else {
        format!("{base}/api/v1{path}")
    }
}

/// Turns a non-success response into an error: 4xx answers are rejections
/// reported verbatim, everything else is a server failure.
async fn check(resp: reqwest::Response) -> Result<reqwest::Response, CtlError> {
    let status = resp.status();
    if status.is_success() {
        return Ok(resp);
    }
    let text = resp.text().await.unwrap_or_default();
    let message = match serde_json::from_str::<ErrorBody>(&text) {
        Ok(ErrorBody { code: Some(code), message: Some(message) }) => format!("{code}: {message}"),
        Ok(ErrorBody { message: Some(message), .. }) => message,
        _ if text.trim().is_empty() => status.to_string(),
        _ => text,
    };
    if status.is_client_error() {
        Err(CtlError::Rejected(message))
    } else {
        Err(CtlError::Server(format!("{status}: {message}")))
    }
}

fn transport(e: reqwest::Error) -> CtlError {
    CtlError::Transport(e.to_string())
}

impl Client {
    pub fn new(endpoint: &str, token: &str) -> Result<Self, CtlError> {
        if token.is_empty() {
            return Err(CtlError::Usage(format!("{TOKEN_VAR} is not set")));
        }
        let http = reqwest::Client::builder()
            .build()
            .map_err(|e| CtlError::Usage(e.to_string()))?;
        Ok(Self {
            http,
            endpoint: endpoint.to_string(),
            token: token.to_string(),
        })
    }

    /// Reads the token from the environment.
    pub fn from_env(endpoint: &str) -> Result<Self, CtlError> {
        Self::new(endpoint, &std::env::var(TOKEN_VAR).unwrap_or_default())
    }

    /// Uploads a course package, or a directory packed on the fly.
    pub async fn upload(&self, package: &Path) -> Result<UploadSummary, CtlError> {
        let bytes = if package.is_dir() {
            pack_dir(package)
        } else {
            std::fs::read(package)
        }
        .map_err(|e| CtlError::Usage(format!("{}: {e}", package.display())))?;
        let resp = self
            .http
            .post(api_url(&self.endpoint, "/admin/courses"))
            .bearer_auth(&self.token)
            .header(reqwest::header::CONTENT_TYPE, "application/zip")
            .body(bytes)
            .send()
            .await
            .map_err(transport)?;
        check(resp).await?.json().await.map_err(transport)
    }

    pub async fn usernames(&self) -> Result<Vec<String>, CtlError> {
        let resp = self
            .http
            .get(api_url(&self.endpoint, "/admin/usernames"))
            .bearer_auth(&self.token)
            .send()
            .await
            .map_err(transport)?;
        Ok(check(resp).await?.json::<Usernames>().await.map_err(transport)?.usernames)
    }

    /// Downloads the anonymised export and writes it to `out` only if it
    /// passes [`scrub_check`].
    pub async fn export(&self, out: &Path, course_id: Option<&str>) -> Result<ExportSummary, CtlError> {
        let usernames = self.usernames().await?;
        let mut req = self
            .http
            .get(api_url(&self.endpoint, "/admin/export"))
            .bearer_auth(&self.token);
        if let Some(id) = course_id {
            req = req.query(&[("course_id", id)]);
        }
        let resp = req.send().await.map_err(transport)?;
        let status = resp.status();
        let archive = check(resp).await?.bytes().await.map_err(transport)?;
        if status != StatusCode::OK {
            return Err(CtlError::Server(format!("unexpected status {status}")));
        }
        let records = scrub_check(&archive, &usernames)?;
        write_atomically(out, &archive)?;
        Ok(ExportSummary {
            path: out.to_path_buf(),
            bytes: archive.len(),
            records,
        })
    }
}

/// Verifies that no known username occurs in the archive bytes or in any
/// decompressed entry; returns the number of event records.
pub fn scrub_check(archive: &[u8], usernames: &[String]) -> Result<usize, CtlError> {
    let entries = read_entries(archive).map_err(|e| CtlError::ScrubCheckFailed(format!("unreadable archive: {e}")))?;
    let found = |hay: &[u8]| {
        usernames
            .iter()
            .filter(|u| !u.is_empty())
            .any(|u| hay.windows(u.len()).any(|w| w == u.as_bytes()))
    };
    if found(archive) || entries.values().any(|v| found(v)) {
        return Err(CtlError::ScrubCheckFailed("a registered username occurs in the export".into()));
    }
    let events = entries
        .get(tutor_core::telemetry::EVENTS_FILE)
        .ok_or_else(|| CtlError::ScrubCheckFailed("archive has no event file".into()))?;
    Ok(events.split(|&b| b == b'\n').filter(|l| !l.is_empty()).count())
}

fn write_atomically(out: &Path, bytes: &[u8]) -> Result<(), CtlError> {
    use std::io::Write;
    let dir = match out.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let io = |e: std::io::Error| CtlError::Usage(format!("{}: {e}", out.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(out).map_err(|e| io(e.error))?;
    Ok(())
}
