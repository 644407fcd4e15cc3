use std::path::PathBuf;
use std::process::ExitCode;

use adminctl::{Client, CtlError};
use clap::{Parser, Subcommand};

/// Course upload and research export for a running tutoring service.
/// The operator token is read from SCRIPT_ADMIN_TOKEN.
#[derive(Debug, Parser)]
#[command(name = "adminctl", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Upload a course package (zip file or unpacked directory).
    Upload {
        #[arg(long)]
        package: PathBuf,
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        endpoint: String,
    },
    /// Download the anonymised research export.
    Export {
        #[arg(long, default_value = "http://127.0.0.1:8080")]
        endpoint: String,
        #[arg(long)]
        out: PathBuf,
        /// Restrict to one course.
        #[arg(long)]
        course_id: Option<String>,
    },
}

async fn run(cli: Cli) -> Result<String, CtlError> {
    match cli.command {
        Command::Upload { package, endpoint } => {
            let summary = Client::from_env(&endpoint)?.upload(&package).await?;
            Ok(summary.message)
        }
        Command::Export { endpoint, out, course_id } => {
            let summary = Client::from_env(&endpoint)?.export(&out, course_id.as_deref()).await?;
            Ok(format!(
                "wrote {} ({} records, {} bytes)",
                summary.path.display(),
                summary.records,
                summary.bytes
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let runtime = match tokio::runtime::Builder::new_current_thread().enable_all().build() {
        Ok(rt) => rt,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match runtime.block_on(run(cli)) {
        Ok(message) => {
            println!("{message}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
