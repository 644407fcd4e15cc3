//! Append-only research event stores.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use thiserror::Error;

use super::TelemetryEvent;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StoreError {
    #[error("research store i/o: {0}")]
    Io(String),
    #[error("research store is corrupt at line {0}")]
    Corrupt(usize),
}

impl From<std::io::Error> for StoreError {
    fn from(e: std::io::Error) -> Self {
        StoreError::Io(e.to_string())
    }
}

/// Append-only event log. `append` stores the whole slice or nothing.
pub trait ResearchStore: Send + Sync {
    fn append(&self, events: &[TelemetryEvent]) -> Result<(), StoreError>;
    fn all_events(&self) -> Result<Vec<TelemetryEvent>, StoreError>;

    /// Events of one client session in arrival order.
    fn session_events(&self, user_id: &str, session_id: &str) -> Result<Vec<TelemetryEvent>, StoreError> {
        Ok(self
            .all_events()?
            .into_iter()
            .filter(|e| e.user_id == user_id && e.session_id == session_id)
            .collect())
    }
}

#[derive(Debug, Default)]
pub struct MemoryResearchStore {
    events: Mutex<Vec<TelemetryEvent>>,
}

impl ResearchStore for MemoryResearchStore {
    fn append(&self, events: &[TelemetryEvent]) -> Result<(), StoreError> {
        self.events.lock().expect("store lock").extend_from_slice(events);
        Ok(())
    }

    fn all_events(&self) -> Result<Vec<TelemetryEvent>, StoreError> {
        Ok(self.events.lock().expect("store lock").clone())
    }
}

/// Journal file with one JSON array per line, one line per batch. Each
/// batch is written with a single write and synced. On open, a torn last
/// line left by a crash is cut off, so a batch is either wholly present or
/// absent.
#[derive(Debug)]
pub struct FileResearchStore {
    path: PathBuf,
    file: Mutex<File>,
}

impl FileResearchStore {
    pub fn open(path: impl AsRef<Path>) -> Result<Self, StoreError> {
        let path = path.as_ref().to_path_buf();
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent)?;
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
        let text = std::fs::read_to_string(&path)?;
        if !text.is_empty() && !text.ends_with('\n') {
            let tail = text.rsplit('\n').next().unwrap_or_default();
            if serde_json::from_str::<Vec<TelemetryEvent>>(tail).is_ok() {
                file.write_all(b"\n")?;
            } else {
                file.set_len((text.len() - tail.len()) as u64)?;
                file.sync_data()?;
            }
        }
        Ok(Self {
            path,
            file: Mutex::new(file),
        })
    }
}

impl ResearchStore for FileResearchStore {
    fn append(&self, events: &[TelemetryEvent]) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(events).map_err(|e| StoreError::Io(e.to_string()))?;
        line.push(b'\n');
        let mut file = self.file.lock().expect("store lock");
        file.write_all(&line)?;
        file.sync_data()?;
        Ok(())
    }

    fn all_events(&self) -> Result<Vec<TelemetryEvent>, StoreError> {
        let _guard = self.file.lock().expect("store lock");
        let text = std::fs::read_to_string(&self.path)?;
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let batch: Vec<TelemetryEvent> =
                serde_json::from_str(line).map_err(|_| StoreError::Corrupt(i + 1))?;
            out.extend(batch);
        }
        Ok(out)
    }
}
