//! Operational document store.
//!
//! Records are JSON documents keyed by `(collection, id)`. A batch of writes
//! is applied atomically. [`MemoryStore`] backs tests; [`FileStore`] keeps an
//! append-only journal with one line per batch that is replayed on open.

use std::collections::BTreeMap;
use std::fs::{File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("store i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("store document `{0}` has an unexpected shape: {1}")]
    Shape(String, String),
    #[error("store journal is corrupt at line {0}")]
    Corrupt(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Write {
    #[serde(rename = "c")]
    pub collection: String,
    pub id: String,
    /// `None` deletes the document.
    pub doc: Option<Value>,
}

impl Write {
    pub fn put<T: Serialize>(collection: &str, id: &str, doc: &T) -> Self {
        Self {
            collection: collection.into(),
            id: id.into(),
            doc: Some(serde_json::to_value(doc).expect("documents serialise")),
        }
    }

    pub fn delete(collection: &str, id: &str) -> Self {
        Self {
            collection: collection.into(),
            id: id.into(),
            doc: None,
        }
    }
}

pub trait DocumentStore: Send + Sync {
    fn get(&self, collection: &str, id: &str) -> Result<Option<Value>, StoreError>;
    fn list(&self, collection: &str) -> Result<Vec<(String, Value)>, StoreError>;
    fn write(&self, batch: Vec<Write>) -> Result<(), StoreError>;
    /// Stores `doc` unless the id is taken. Returns whether it was stored.
    fn insert_new(&self, collection: &str, id: &str, doc: Value) -> Result<bool, StoreError>;
}

pub fn get_as<T: DeserializeOwned>(
    store: &dyn DocumentStore,
    collection: &str,
    id: &str,
) -> Result<Option<T>, StoreError> {
    store
        .get(collection, id)?
        .map(|v| serde_json::from_value(v).map_err(|e| StoreError::Shape(format!("{collection}/{id}"), e.to_string())))
        .transpose()
}

pub fn list_as<T: DeserializeOwned>(
    store: &dyn DocumentStore,
    collection: &str,
) -> Result<Vec<(String, T)>, StoreError> {
    store
        .list(collection)?
        .into_iter()
        .map(|(id, v)| {
            serde_json::from_value(v)
                .map(|t| (id.clone(), t))
                .map_err(|e| StoreError::Shape(format!("{collection}/{id}"), e.to_string()))
        })
        .collect()
}

pub fn put_as<T: Serialize>(
    store: &dyn DocumentStore,
    collection: &str,
    id: &str,
    doc: &T,
) -> Result<(), StoreError> {
    store.write(vec![Write::put(collection, id, doc)])
}

type Collections = BTreeMap<String, BTreeMap<String, Value>>;

fn apply(data: &mut Collections, batch: Vec<Write>) {
    for w in batch {
        match w.doc {
            Some(doc) => {
                data.entry(w.collection).or_default().insert(w.id, doc);
            }
            None => {
                if let Some(c) = data.get_mut(&w.collection) {
                    c.remove(&w.id);
                }
            }
        }
    }
}

#[derive(Debug, Default)]
pub struct MemoryStore {
    data: RwLock<Collections>,
}

impl MemoryStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Every stored document serialised, for whole-store scans.
    pub fn dump(&self) -> Vec<u8> {
        serde_json::to_vec(&*self.data.read().expect("store lock")).expect("documents serialise")
    }
}

impl DocumentStore for MemoryStore {
    fn get(&self, collection: &str, id: &str) -> Result<Option<Value>, StoreError> {
        Ok(self
            .data
            .read()
            .expect("store lock")
            .get(collection)
            .and_then(|c| c.get(id))
            .cloned())
    }

    fn list(&self, collection: &str) -> Result<Vec<(String, Value)>, StoreError> {
        Ok(self
            .data
            .read()
            .expect("store lock")
            .get(collection)
            .map(|c| c.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
            .unwrap_or_default())
    }

    fn write(&self, batch: Vec<Write>) -> Result<(), StoreError> {
        apply(&mut self.data.write().expect("store lock"), batch);
        Ok(())
    }

    fn insert_new(&self, collection: &str, id: &str, doc: Value) -> Result<bool, StoreError> {
        let mut data = self.data.write().expect("store lock");
        let c = data.entry(collection.to_string()).or_default();
        if c.contains_key(id) {
            return Ok(false);
        }
        c.insert(id.to_string(), doc);
        Ok(true)
    }
}

/// Journal-backed store. The whole data set is held in memory; each batch
/// is appended as one JSON line and synced before it becomes visible.
#[derive(Debug)]
pub struct FileStore {
    path: PathBuf,
    data: RwLock<Collections>,
    journal: Mutex<File>,
}

pub const JOURNAL_FILE: &str = "operational.ndjson";

impl FileStore {
    pub fn open(dir: impl AsRef<Path>) -> Result<Self, StoreError> {
        std::fs::create_dir_all(dir.as_ref())?;
        let path = dir.as_ref().join(JOURNAL_FILE);
        let mut data = Collections::new();
        let mut committed = None;
        if path.exists() {
            let text = std::fs::read_to_string(&path)?;
            let lines: Vec<&str> = text.lines().collect();
            for (i, line) in lines.iter().enumerate() {
                if line.trim().is_empty() {
                    continue;
                }
                match serde_json::from_str::<Vec<Write>>(line) {
                    Ok(batch) => apply(&mut data, batch),
                    // A torn final line is a batch that never committed.
                    Err(_) if i + 1 == lines.len() && !text.ends_with('\n') => {
                        committed = Some(text.len() - line.len());
                    }
                    Err(_) => return Err(StoreError::Corrupt(i + 1)),
                }
            }
        }
        let mut journal = OpenOptions::new().create(true).append(true).open(&path)?;
        if let Some(len) = committed {
            journal.set_len(len as u64)?;
            journal.sync_data()?;
        } else if std::fs::read(&path)?.last().is_some_and(|&b| b != b'\n') {
            journal.write_all(b"\n")?;
        }
        Ok(Self {
            path,
            data: RwLock::new(data),
            journal: Mutex::new(journal),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    fn commit(&self, data: &mut Collections, batch: Vec<Write>) -> Result<(), StoreError> {
        let mut line = serde_json::to_vec(&batch).expect("writes serialise");
        line.push(b'\n');
        let mut journal = self.journal.lock().expect("journal lock");
        journal.write_all(&line)?;
        journal.sync_data()?;
        apply(data, batch);
        Ok(())
    }
}

impl DocumentStore for FileStore {
    fn get(&self, collection: &str, id: &str) -> Result<Option<Value>, StoreError> {
        Ok(self
            .data
            .read()
            .expect("store lock")
            .get(collection)
            .and_then(|c| c.get(id))
            .cloned())
    }

    fn list(&self, collection: &str) -> Result<Vec<(String, Value)>, StoreError> {
        Ok(self
            .data
            .read()
            .expect("store lock")
            .get(collection)
            .map(|c| c.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
            .unwrap_or_default())
    }

    fn write(&self, batch: Vec<Write>) -> Result<(), StoreError> {
        let mut data = self.data.write().expect("store lock");
        self.commit(&mut data, batch)
    }

    fn insert_new(&self, collection: &str, id: &str, doc: Value) -> Result<bool, StoreError> {
        let mut data = self.data.write().expect("store lock");
        if data.get(collection).is_some_and(|c| c.contains_key(id)) {
            return Ok(false);
        }
        self.commit(&mut data, vec![Write { collection: collection.into(), id: id.into(), doc: Some(doc) }])?;
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn exercise(store: &dyn DocumentStore) {
        assert!(store.insert_new("users", "a", json!({"n": 1})).unwrap());
        assert!(!store.insert_new("users", "a", json!({"n": 2})).unwrap());
        store
            .write(vec![
                Write::put("users", "b", &json!({"n": 3})),
                Write::put("skills", "b", &json!([1, 2])),
            ])
            .unwrap();
        assert_eq!(store.get("users", "a").unwrap(), Some(json!({"n": 1})));
        assert_eq!(store.list("users").unwrap().len(), 2);
        store.write(vec![Write::delete("users", "a")]).unwrap();
        assert_eq!(store.get("users", "a").unwrap(), None);
        assert!(store.list("nothing").unwrap().is_empty());
    }

    #[test]
    fn memory_store_semantics() {
        exercise(&MemoryStore::new());
    }

    #[test]
    fn file_store_replays_its_journal() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = FileStore::open(dir.path()).unwrap();
            exercise(&store);
        }
        let reopened = FileStore::open(dir.path()).unwrap();
        assert_eq!(reopened.get("users", "b").unwrap(), Some(json!({"n": 3})));
        assert_eq!(reopened.get("users", "a").unwrap(), None);
        assert_eq!(get_as::<Vec<u8>>(&reopened, "skills", "b").unwrap(), Some(vec![1, 2]));
    }

    #[test]
    fn torn_final_batch_is_dropped() {
        let dir = tempfile::tempdir().unwrap();
        {
            let store = FileStore::open(dir.path()).unwrap();
            put_as(&store, "c", "1", &1).unwrap();
        }
        let path = dir.path().join(JOURNAL_FILE);
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("[{\"c\":\"c\",\"id\":\"2\"");
        std::fs::write(&path, text).unwrap();
        let store = FileStore::open(dir.path()).unwrap();
        assert_eq!(store.list("c").unwrap().len(), 1);
        put_as(&store, "c", "3", &3).unwrap();
        assert_eq!(FileStore::open(dir.path()).unwrap().list("c").unwrap().len(), 2);
    }
}
