//! Command-line front end for the goal-oriented PINN experiments.
//!
//! Everything the binary does is reachable from here so the test suites can
//! drive commands in-process.

pub mod args;
pub mod commands;
pub mod manifest;
pub mod plot;
pub mod resolve;
pub mod summary;

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

pub use args::{Cli, Command};

pub const EXIT_OK: i32 = 0;
/// A check failed (gradient check breach, replay mismatch) or I/O broke.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Numerical(String),
    Check(String),
    Other(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Check(_) | CliError::Other(_) => EXIT_FAILURE,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Check(msg) => write!(f, "check failed: {msg}"),
            CliError::Other(err) => write!(f, "{err:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<goalpinn_core::Error> for CliError {
    fn from(err: goalpinn_core::Error) -> Self {
        use goalpinn_core::Error as E;
        match err {
            E::Numerical { .. } => CliError::Numerical(err.to_string()),
            E::Config(_) | E::UnknownCase(_) | E::DimensionMismatch { .. } => CliError::Usage(err.to_string()),
            other => CliError::Other(other.into()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        CliError::Other(err.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(err: serde_json::Error) -> Self {
        CliError::Other(err.into())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Caps the global worker pool from `GOALPINN_THREADS`. Safe to call more
/// than once; only the first call takes effect.
pub fn init_threads() {
    if let Some(n) = std::env::var("GOALPINN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return err.exit_code();
        }
    };
    init_threads();
    match commands::execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("goalpinn: {err}");
            err.exit_code()
        }
    }
}
