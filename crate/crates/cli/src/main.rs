mod args;
mod commands;
mod manifest;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

/// Environment variable capping the worker-thread count.
const THREADS_VAR: &str = "FRACWAVE_THREADS";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad or unreadable configuration; exit code 1.
    #[error("invalid configuration: {0}")]
    Config(String),
    /// Non-convergence or a verdict that could not be reached; exit code 2.
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl From<fracwave::Error> for CliError {
    fn from(e: fracwave::Error) -> Self {
        use fracwave::Error as E;
        match e {
            E::InvalidParameter { .. } | E::InvalidGrid(_) | E::Config(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numerical(format!("i/o: {e}"))
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("{THREADS_VAR} must be a positive integer, got `{raw}`")))?;
    // a second initialisation only fails when a pool already exists
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|_| commands::dispatch(cli));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
