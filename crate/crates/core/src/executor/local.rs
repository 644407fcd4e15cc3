//! Subprocess backend for development and tests.
//!
//! Each run gets a fresh temp directory, an empty environment, no stdin and
//! its own process group. CPU time and address space are capped with
//! rlimits; the wall-clock deadline is the time limit plus a grace period,
//! after which the whole process group is killed. Memory enforcement depends
//! on the platform honouring `RLIMIT_AS`.

use std::os::unix::process::ExitStatusExt;
use std::path::PathBuf;
use std::process::Stdio;
use std::time::{Duration, Instant};

use async_trait::async_trait;
use tokio::io::{AsyncRead, AsyncReadExt};
use tokio::process::Command;

use super::{
    classify, parse_markers, tail, ExecutionError, ExecutionRequest, ExecutionResult,
    SandboxBackend, Termination, TAIL_BYTES,
};

/// Output kept per stream while the program runs; older bytes are dropped.
const CAPTURE_BYTES: usize = 1 << 20;
const MAX_FILE_BYTES: u64 = 16 << 20;

#[derive(Debug, Clone)]
pub struct LocalBackend {
    pub python: PathBuf,
    pub grace: Duration,
    pub enforce_memory: bool,
}

impl Default for LocalBackend {
    fn default() -> Self {
        Self {
            python: PathBuf::from("python3"),
            grace: Duration::from_millis(1000),
            enforce_memory: true,
        }
    }
}

impl LocalBackend {
    pub fn new(python: impl Into<PathBuf>) -> Self {
        Self {
            python: python.into(),
            ..Self::default()
        }
    }
}

async fn capture(mut stream: impl AsyncRead + Unpin) -> Vec<u8> {
    let mut kept = Vec::new();
    let mut buf = [0u8; 8192];
    loop {
        match stream.read(&mut buf).await {
            Ok(0) | Err(_) => break,
            Ok(n) => {
                kept.extend_from_slice(&buf[..n]);
                if kept.len() > 2 * CAPTURE_BYTES {
                    kept.drain(..kept.len() - CAPTURE_BYTES);
                }
            }
        }
    }
    if kept.len() > CAPTURE_BYTES {
        kept.drain(..kept.len() - CAPTURE_BYTES);
    }
    kept
}

#[cfg(all(target_os = "linux", target_env = "gnu"))]
type Resource = libc::__rlimit_resource_t;
#[cfg(not(all(target_os = "linux", target_env = "gnu")))]
type Resource = libc::c_int;

fn set_limit(resource: Resource, soft: u64, hard: u64) -> std::io::Result<()> {
    let lim = libc::rlimit {
        rlim_cur: soft as libc::rlim_t,
        rlim_max: hard as libc::rlim_t,
    };
    // SAFETY: setrlimit only reads the struct passed by pointer.
    if unsafe { libc::setrlimit(resource, &lim) } == 0 {
        Ok(())
    } else {
        Err(std::io::Error::last_os_error())
    }
}

fn kill_group(pid: u32) {
    // SAFETY: plain syscall; the child leads its own process group.
    unsafe {
        libc::killpg(pid as libc::pid_t, libc::SIGKILL);
    }
}

#[async_trait]
impl SandboxBackend for LocalBackend {
    async fn run(&self, request: &ExecutionRequest) -> Result<ExecutionResult, ExecutionError> {
        let unavailable = |e: std::io::Error| ExecutionError::SandboxUnavailable(e.to_string());
        let dir = tempfile::tempdir().map_err(unavailable)?;
        let script = dir.path().join("main.py");
        tokio::fs::write(&script, &request.source_code)
            .await
            .map_err(unavailable)?;

        let cpu_secs = u64::from(request.time_limit_ms).div_ceil(1000).max(1);
        let memory_bytes = u64::from(request.memory_limit_kb) * 1024;
        let enforce_memory = self.enforce_memory;

        let mut cmd = Command::new(&self.python);
        cmd.arg("-I")
            .arg("-B")
            .arg(&script)
            .current_dir(dir.path())
            .env_clear()
            .env("PATH", "/usr/local/bin:/usr/bin:/bin")
            .env("HOME", dir.path())
            .env("LANG", "C.UTF-8")
            .env("PYTHONUNBUFFERED", "1")
            .env("PYTHONIOENCODING", "utf-8")
            .env("OMP_NUM_THREADS", "1")
            .env("OPENBLAS_NUM_THREADS", "1")
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .kill_on_drop(true)
            .process_group(0);
        // SAFETY: the closure only calls async-signal-safe setrlimit.
        unsafe {
            cmd.pre_exec(move || {
                set_limit(libc::RLIMIT_CPU, cpu_secs, cpu_secs + 1)?;
                set_limit(libc::RLIMIT_CORE, 0, 0)?;
                set_limit(libc::RLIMIT_FSIZE, MAX_FILE_BYTES, MAX_FILE_BYTES)?;
                if enforce_memory {
                    set_limit(libc::RLIMIT_AS, memory_bytes, memory_bytes)?;
                }
                Ok(())
            });
        }

        let started = Instant::now();
        let mut child = cmd.spawn().map_err(unavailable)?;
        let pid = child.id();
        let stdout = tokio::spawn(capture(child.stdout.take().expect("piped stdout")));
        let stderr = tokio::spawn(capture(child.stderr.take().expect("piped stderr")));

        let deadline = Duration::from_millis(u64::from(request.time_limit_ms)) + self.grace;
        let (status, deadline_hit) = match tokio::time::timeout(deadline, child.wait()).await {
            Ok(status) => (status, false),
            Err(_) => {
                if let Some(pid) = pid {
                    kill_group(pid);
                }
                (child.wait().await, true)
            }
        };
        // Stray grandchildren may still hold the pipes open.
        if let Some(pid) = pid {
            kill_group(pid);
        }
        let wall_time_ms = started.elapsed().as_millis() as u64;
        let status = status.map_err(unavailable)?;

        let join = |h: tokio::task::JoinHandle<Vec<u8>>| async move {
            match tokio::time::timeout(Duration::from_secs(1), h).await {
                Ok(Ok(bytes)) => String::from_utf8_lossy(&bytes).into_owned(),
                _ => String::new(),
            }
        };
        let stdout = join(stdout).await;
        let stderr = join(stderr).await;

        let termination = if deadline_hit || status.signal() == Some(libc::SIGXCPU) {
            Termination::TimedOut
        } else {
            Termination::Exited {
                success: status.success(),
            }
        };
        let verdicts = parse_markers(&stdout, request.declared_tests);
        Ok(ExecutionResult {
            overall: classify(termination, &verdicts),
            verdicts,
            stdout_tail: tail(&stdout, TAIL_BYTES),
            stderr_tail: tail(&stderr, TAIL_BYTES),
            wall_time_ms,
        })
    }
}
