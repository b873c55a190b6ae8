//! Command-line front end: sieves, criterion sweeps, stationary states and
//! tables as CSV or JSON artifacts, plus a config echo that replays the run.

// `!(x >= 0.0)` style guards reject NaN along with out-of-range values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod config;
pub mod output;
pub mod parse;
pub mod run;
pub mod tables;

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use thiserror::Error;

pub use config::{Format, RunConfig, SchemeSet, Task};

/// Environment variable capping the number of worker threads.
pub const WORKERS_ENV: &str = "CLASSICALITY_WORKERS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("invalid input: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    /// 2 usage, 3 validation, 4 numerical failure; i/o problems count as
    /// validation of the output path.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Validation(_) | CliError::Io(_) => 3,
            CliError::Numerical(_) => 4,
        }
    }
}

impl From<classicality_core::Error> for CliError {
    fn from(e: classicality_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

/// Parses `argv`, runs the command, prints the summary and returns the exit
/// status.
pub fn main_with<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match args::Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match cli.command.into_config().and_then(|cfg| run::run(&cfg).map(|s| (cfg, s))) {
        Ok((cfg, summary)) => {
            // a closed stdout (e.g. piped into `head`) is not a failure of the run
            let mut out = std::io::stdout().lock();
            for line in summary {
                let _ = writeln!(out, "{line}");
            }
            let _ = writeln!(out, "wrote {} and {}", cfg.out.display(), cfg.echo_path().display());
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Sizes the global thread pool from [`WORKERS_ENV`] when it is set.
pub fn init_workers() -> Result<(), CliError> {
    let Ok(v) = std::env::var(WORKERS_ENV) else { return Ok(()) };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("{WORKERS_ENV}={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().map_err(|e| CliError::Usage(e.to_string()))
}
