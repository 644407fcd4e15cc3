//! Service configuration from `SCRIPT_*` environment variables.
//!
//! | variable | default |
//! |---|---|
//! | `SCRIPT_BIND` | `127.0.0.1:8080` |
//! | `SCRIPT_STORE` | `memory://` (or `file:///dir`) |
//! | `SCRIPT_RESEARCH_STORE` | `memory://` (or `file:///path/events.ndjson`) |
//! | `SCRIPT_SANDBOX` | `local` (or `judge`) |
//! | `SCRIPT_PYTHON` | `python3` |
//! | `SCRIPT_JUDGE_URL` | required for `judge` |
//! | `SCRIPT_EXECUTOR_WORKERS` | `4` |
//! | `SCRIPT_LLM_ENDPOINT`, `SCRIPT_LLM_MODEL` | unset: hints unavailable |
//! | `SCRIPT_LLM_STUB_SCRIPT` | path to a stub playback script |
//! | `SCRIPT_LLM_TIMEOUT_MS` | `30000` |
//! | `SCRIPT_LLM_MAX_CONCURRENT` | `8` |
//! | `SCRIPT_ADMIN_TOKEN` | unset: admin routes refuse every request |
//! | `SCRIPT_SESSION_TTL_SECS` | `86400` |
//! | `SCRIPT_REQUEST_TIMEOUT_MS` | `120000` |
//! | `SCRIPT_ARGON2_MEMORY_KIB`, `SCRIPT_ARGON2_ITERATIONS` | `19456`, `2` |
//! | `SCRIPT_PRELOAD` | comma-separated course packages or directories |

use std::net::SocketAddr;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Duration;

#[derive(Debug, Clone, PartialEq)]
pub enum SandboxConfig {
    Local { python: PathBuf },
    Judge { url: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct LlmSettings {
    pub endpoint: Option<String>,
    pub model: String,
    pub stub_script: Option<PathBuf>,
    pub timeout: Duration,
    pub max_concurrent: usize,
    pub temperature: f64,
    pub max_output_tokens: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub bind: SocketAddr,
    pub store_url: String,
    pub research_store_url: String,
    pub sandbox: SandboxConfig,
    pub executor_workers: usize,
    pub llm: LlmSettings,
    pub admin_token: Option<String>,
    pub session_ttl: Duration,
    pub request_timeout: Duration,
    pub argon2_memory_kib: u32,
    pub argon2_iterations: u32,
    pub preload: Vec<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            store_url: "memory://".into(),
            research_store_url: "memory://".into(),
            sandbox: SandboxConfig::Local {
                python: PathBuf::from("python3"),
            },
            executor_workers: 4,
            llm: LlmSettings {
                endpoint: None,
                model: "default".into(),
                stub_script: None,
                timeout: Duration::from_secs(30),
                max_concurrent: 8,
                temperature: 0.7,
                max_output_tokens: 512,
            },
            admin_token: None,
            session_ttl: Duration::from_secs(24 * 3600),
            request_timeout: Duration::from_secs(120),
            argon2_memory_kib: 19_456,
            argon2_iterations: 2,
            preload: Vec::new(),
        }
    }
}

fn parse<T: FromStr>(
    get: &impl Fn(&str) -> Option<String>,
    key: &str,
    default: T,
) -> Result<T, String> {
    match get(key) {
        None => Ok(default),
        Some(raw) => raw
            .trim()
            .parse()
            .map_err(|_| format!("{key}: cannot parse `{raw}`")),
    }
}

impl Config {
    pub fn from_env() -> Result<Self, String> {
        Self::from_lookup(|k| std::env::var(k).ok().filter(|v| !v.is_empty()))
    }

    /// Reads settings through `get`, which maps variable names to values.
    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, String> {
        let d = Config::default();
        let sandbox = match get("SCRIPT_SANDBOX").as_deref().unwrap_or("local") {
            "local" => SandboxConfig::Local {
                python: get("SCRIPT_PYTHON").map(PathBuf::from).unwrap_or_else(|| "python3".into()),
            },
            "judge" => SandboxConfig::Judge {
                url: get("SCRIPT_JUDGE_URL")
                    .ok_or("SCRIPT_JUDGE_URL is required when SCRIPT_SANDBOX=judge")?,
            },
            other => return Err(format!("SCRIPT_SANDBOX: unknown backend `{other}`")),
        };
        let config = Config {
            bind: parse(&get, "SCRIPT_BIND", d.bind)?,
            store_url: get("SCRIPT_STORE").unwrap_or(d.store_url),
            research_store_url: get("SCRIPT_RESEARCH_STORE").unwrap_or(d.research_store_url),
            sandbox,
            executor_workers: parse(&get, "SCRIPT_EXECUTOR_WORKERS", d.executor_workers)?,
            llm: LlmSettings {
                endpoint: get("SCRIPT_LLM_ENDPOINT"),
                model: get("SCRIPT_LLM_MODEL").unwrap_or(d.llm.model),
                stub_script: get("SCRIPT_LLM_STUB_SCRIPT").map(PathBuf::from),
                timeout: Duration::from_millis(parse(&get, "SCRIPT_LLM_TIMEOUT_MS", 30_000)?),
                max_concurrent: parse(&get, "SCRIPT_LLM_MAX_CONCURRENT", d.llm.max_concurrent)?,
                temperature: parse(&get, "SCRIPT_LLM_TEMPERATURE", d.llm.temperature)?,
                max_output_tokens: parse(&get, "SCRIPT_LLM_MAX_TOKENS", d.llm.max_output_tokens)?,
            },
            admin_token: get("SCRIPT_ADMIN_TOKEN"),
            session_ttl: Duration::from_secs(parse(&get, "SCRIPT_SESSION_TTL_SECS", 86_400)?),
            request_timeout: Duration::from_millis(parse(&get, "SCRIPT_REQUEST_TIMEOUT_MS", 120_000)?),
            argon2_memory_kib: parse(&get, "SCRIPT_ARGON2_MEMORY_KIB", d.argon2_memory_kib)?,
            argon2_iterations: parse(&get, "SCRIPT_ARGON2_ITERATIONS", d.argon2_iterations)?,
            preload: get("SCRIPT_PRELOAD")
                .map(|v| {
                    v.split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(PathBuf::from)
                        .collect()
                })
                .unwrap_or_default(),
        };
        if config.executor_workers == 0 {
            return Err("SCRIPT_EXECUTOR_WORKERS must be at least 1".into());
        }
        if config.admin_token.as_ref().is_some_and(|t| t.len() < 16) {
            return Err("SCRIPT_ADMIN_TOKEN must be at least 16 characters".into());
        }
        Ok(config)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashMap;

    fn lookup(pairs: &[(&str, &str)]) -> impl Fn(&str) -> Option<String> {
        let map: HashMap<String, String> =
            pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        move |k| map.get(k).cloned()
    }

    #[test]
    fn defaults_apply() {
        assert_eq!(Config::from_lookup(lookup(&[])).unwrap(), Config::default());
    }

    #[test]
    fn values_are_parsed() {
        let c = Config::from_lookup(lookup(&[
            ("SCRIPT_SANDBOX", "judge"),
            ("SCRIPT_JUDGE_URL", "http://judge:2358"),
            ("SCRIPT_EXECUTOR_WORKERS", "2"),
            ("SCRIPT_PRELOAD", "a.zip, b"),
            ("SCRIPT_BIND", "0.0.0.0:9000"),
        ]))
        .unwrap();
        assert_eq!(c.sandbox, SandboxConfig::Judge { url: "http://judge:2358".into() });
        assert_eq!(c.executor_workers, 2);
        assert_eq!(c.preload, vec![PathBuf::from("a.zip"), PathBuf::from("b")]);
        assert_eq!(c.bind.port(), 9000);
    }

    #[test]
    fn bad_values_are_reported() {
        assert!(Config::from_lookup(lookup(&[("SCRIPT_EXECUTOR_WORKERS", "many")])).is_err());
        assert!(Config::from_lookup(lookup(&[("SCRIPT_SANDBOX", "judge")])).is_err());
        assert!(Config::from_lookup(lookup(&[("SCRIPT_ADMIN_TOKEN", "short")])).is_err());
    }
}
