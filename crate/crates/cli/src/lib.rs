//! Library side of the `dqs` binary: configuration, dispatch and output.

pub mod commands;
pub mod config;
pub mod output;

use clap::Parser;
use config::{Command, Format, RunConfig};
use dqs_core::DqsError;
use std::io::Write;
use std::path::PathBuf;
use thiserror::Error;

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_BREACH: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] DqsError),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => EXIT_NUMERICAL,
            _ => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "dqs", version, about = "Phase-averaged displacement sensing: bounds, scans and checks")]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Worker threads; falls back to DQS_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
}

/// Thread count from the flag, else `DQS_THREADS`, else `None` for the rayon default.
pub fn resolve_threads(flag: Option<usize>, env: Option<&str>) -> Result<Option<usize>, CliError> {
    let n = match (flag, env) {
        (Some(n), _) => Some(n),
        (None, Some(s)) => {
            Some(s.trim().parse::<usize>().map_err(|_| CliError::Config(format!("DQS_THREADS={s:?} is not a count")))?)
        }
        (None, None) => None,
    };
    if n == Some(0) {
        return Err(CliError::Config("thread count must be positive".into()));
    }
    Ok(n)
}

/// Runs one invocation and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    match execute(cli) {
        Ok(breach) => {
            if breach {
                EXIT_BREACH
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("dqs: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let env = std::env::var("DQS_THREADS").ok();
    if let Some(n) = resolve_threads(cli.threads, env.as_deref())? {
        // a second initialisation in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let cfg = RunConfig::load(&cli.config)?;
    let outcome = commands::dispatch(cli.command, &cfg)?;
    let format = cli.format.or(cfg.output.format).unwrap_or_default();
    let mut bytes = Vec::new();
    match format {
        Format::Csv => outcome.table.write_csv(cli.command.name(), &mut bytes)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut bytes, &outcome.json).map_err(|e| CliError::Io(e.to_string()))?;
            bytes.push(b'\n');
        }
    }
    match cli.out.as_ref().or(cfg.output.path.as_ref()) {
        Some(path) => std::fs::write(path, &bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
        None => std::io::stdout().lock().write_all(&bytes).map_err(|e| CliError::Io(e.to_string()))?,
    }
    Ok(outcome.breach)
}
