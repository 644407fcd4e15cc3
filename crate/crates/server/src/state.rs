//! Shared application state.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};
use std::time::Duration;

use dashmap::DashMap;
use tokio::sync::{Mutex, OwnedMutexGuard};
use tutor_core::domain::{load_course_package, pack_dir};
use tutor_core::executor::{Executor, JudgeBackend, LocalBackend, SandboxBackend};
use tutor_core::inner_loop::{
    HttpLlmClient, LlmClient, LlmClientConfig, LlmError, LlmRequest, StubLlm, StubScript,
};
use tutor_core::telemetry::{FileResearchStore, MemoryResearchStore, ResearchStore};
use tutor_core::{Course, DomainError};

use crate::auth::Passwords;
use crate::config::{Config, SandboxConfig};
use crate::store::{list_as, put_as, DocumentStore, FileStore, MemoryStore, StoreError};

pub const COURSES: &str = "courses";

/// Loaded courses plus the global task index.
#[derive(Debug, Default)]
pub struct Catalog {
    courses: BTreeMap<String, Arc<Course>>,
    task_course: HashMap<String, String>,
}

impl Catalog {
    pub fn course(&self, course_id: &str) -> Option<Arc<Course>> {
        self.courses.get(course_id).cloned()
    }

    /// The course owning `task_id`.
    pub fn course_of_task(&self, task_id: &str) -> Option<Arc<Course>> {
        self.task_course.get(task_id).and_then(|c| self.course(c))
    }

    pub fn courses(&self) -> impl Iterator<Item = &Arc<Course>> {
        self.courses.values()
    }

    /// Task ids form one namespace across courses. Replacing a course with a
    /// new version is allowed; taking another course's task id is not.
    pub fn check_insert(&self, course: &Course) -> Result<(), DomainError> {
        for t in &course.tasks {
            if let Some(owner) = self.task_course.get(&t.task_id) {
                if *owner != course.course_id {
                    return Err(DomainError::DuplicateId(t.task_id.clone()));
                }
            }
        }
        Ok(())
    }

    pub fn insert(&mut self, course: Course) {
        if let Some(old) = self.courses.remove(&course.course_id) {
            for t in &old.tasks {
                self.task_course.remove(&t.task_id);
            }
        }
        for t in &course.tasks {
            self.task_course.insert(t.task_id.clone(), course.course_id.clone());
        }
        self.courses.insert(course.course_id.clone(), Arc::new(course));
    }
}

/// Answers every request with an error; used when no LLM is configured.
#[derive(Debug)]
pub struct NoLlm;

#[async_trait::async_trait]
impl LlmClient for NoLlm {
    async fn complete(&self, _request: &LlmRequest) -> Result<String, LlmError> {
        Err(LlmError::Protocol("no LLM endpoint is configured".into()))
    }
}

pub struct Inner {
    config: Config,
    store: Arc<dyn DocumentStore>,
    research: Arc<dyn ResearchStore>,
    executor: Executor,
    llm: Arc<dyn LlmClient>,
    passwords: Passwords,
    catalog: RwLock<Catalog>,
    user_locks: DashMap<String, Arc<Mutex<()>>>,
}

#[derive(Clone)]
pub struct AppState(Arc<Inner>);

/// Everything needed to assemble an [`AppState`] explicitly.
pub struct Parts {
    pub config: Config,
    pub store: Arc<dyn DocumentStore>,
    pub research: Arc<dyn ResearchStore>,
    pub sandbox: Arc<dyn SandboxBackend>,
    pub llm: Arc<dyn LlmClient>,
}

fn open_store(url: &str) -> anyhow::Result<Arc<dyn DocumentStore>> {
    if url == "memory://" {
        Ok(Arc::new(MemoryStore::new()))
    } else if let Some(dir) = url.strip_prefix("file://") {
        Ok(Arc::new(FileStore::open(dir)?))
    } else {
        anyhow::bail!("unsupported store `{url}`; use memory:// or file:///dir")
    }
}

fn open_research_store(url: &str) -> anyhow::Result<Arc<dyn ResearchStore>> {
    if url == "memory://" {
        Ok(Arc::new(MemoryResearchStore::default()))
    } else if let Some(path) = url.strip_prefix("file://") {
        Ok(Arc::new(FileResearchStore::open(path)?))
    } else {
        anyhow::bail!("unsupported research store `{url}`; use memory:// or file:///path")
    }
}

fn build_llm(config: &Config) -> anyhow::Result<Arc<dyn LlmClient>> {
    let llm = &config.llm;
    if let Some(path) = &llm.stub_script {
        let script: StubScript = serde_json::from_slice(&std::fs::read(path)?)?;
        return Ok(Arc::new(StubLlm::from_script(script)));
    }
    match &llm.endpoint {
        Some(endpoint) => Ok(Arc::new(
            HttpLlmClient::new(LlmClientConfig {
                endpoint_url: endpoint.clone(),
                model_name: llm.model.clone(),
                temperature: llm.temperature,
                max_output_tokens: llm.max_output_tokens,
                request_timeout_ms: llm.timeout.as_millis() as u64,
                max_concurrent: llm.max_concurrent,
            })
            .map_err(|e| anyhow::anyhow!("LLM client: {e}"))?,
        )),
        None => Ok(Arc::new(NoLlm)),
    }
}

impl AppState {
    /// Opens stores and backends as configured and loads persisted and
    /// preloaded courses.
    pub fn from_config(config: Config) -> anyhow::Result<Self> {
        let sandbox: Arc<dyn SandboxBackend> = match &config.sandbox {
            SandboxConfig::Local { python } => Arc::new(LocalBackend::new(python.clone())),
            SandboxConfig::Judge { url } => Arc::new(JudgeBackend::new(url.clone())),
        };
        let parts = Parts {
            store: open_store(&config.store_url)?,
            research: open_research_store(&config.research_store_url)?,
            llm: build_llm(&config)?,
            sandbox,
            config,
        };
        let state = Self::from_parts(parts)?;
        for path in state.config().preload.clone() {
            let bytes = if path.is_dir() { pack_dir(&path)? } else { std::fs::read(&path)? };
            let course = load_course_package(&bytes)
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            state.install_course(course)?;
        }
        Ok(state)
    }

    pub fn from_parts(parts: Parts) -> anyhow::Result<Self> {
        let passwords = Passwords::new(parts.config.argon2_memory_kib, parts.config.argon2_iterations)
            .map_err(|e| anyhow::anyhow!("argon2 parameters: {e}"))?;
        let mut catalog = Catalog::default();
        for (_, course) in list_as::<Course>(parts.store.as_ref(), COURSES)? {
            catalog.insert(course);
        }
        Ok(AppState(Arc::new(Inner {
            executor: Executor::new(parts.sandbox, parts.config.executor_workers),
            config: parts.config,
            store: parts.store,
            research: parts.research,
            llm: parts.llm,
            passwords,
            catalog: RwLock::new(catalog),
            user_locks: DashMap::new(),
        })))
    }

    pub fn config(&self) -> &Config {
        &self.0.config
    }

    pub fn store(&self) -> &dyn DocumentStore {
        self.0.store.as_ref()
    }

    pub fn research(&self) -> &dyn ResearchStore {
        self.0.research.as_ref()
    }

    pub fn executor(&self) -> &Executor {
        &self.0.executor
    }

    pub fn llm(&self) -> &dyn LlmClient {
        self.0.llm.as_ref()
    }

    pub fn passwords(&self) -> &Passwords {
        &self.0.passwords
    }

    pub fn llm_timeout(&self) -> Duration {
        self.0.config.llm.timeout
    }

    pub fn course(&self, course_id: &str) -> Option<Arc<Course>> {
        self.0.catalog.read().expect("catalog lock").course(course_id)
    }

    pub fn course_of_task(&self, task_id: &str) -> Option<Arc<Course>> {
        self.0.catalog.read().expect("catalog lock").course_of_task(task_id)
    }

    pub fn courses(&self) -> Vec<Arc<Course>> {
        self.0.catalog.read().expect("catalog lock").courses().cloned().collect()
    }

    /// Persists `course` and makes it visible, replacing an older version
    /// with the same id.
    pub fn install_course(&self, course: Course) -> Result<(), InstallError> {
        let mut catalog = self.0.catalog.write().expect("catalog lock");
        catalog.check_insert(&course)?;
        put_as(self.store(), COURSES, &course.course_id, &course)?;
        catalog.insert(course);
        Ok(())
    }

    /// Serialises learner-state and consent updates of one user.
    pub async fn lock_user(&self, user_id: &str) -> OwnedMutexGuard<()> {
        let lock = self
            .0
            .user_locks
            .entry(user_id.to_string())
            .or_default()
            .clone();
        lock.lock_owned().await
    }
}

#[derive(Debug, thiserror::Error)]
pub enum InstallError {
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl From<InstallError> for crate::error::ApiError {
    fn from(e: InstallError) -> Self {
        match e {
            InstallError::Domain(d) => d.into(),
            InstallError::Store(s) => s.into(),
        }
    }
}

