//! Command-line front end: point evaluations, sweeps, Monte Carlo runs and
//! cross-validation, with CSV output and JSON run manifests.

use std::ffi::OsString;

use clap::Parser;

pub mod commands;
pub mod format;
pub mod params;
pub mod validate;

pub use params::{Cli, Command};

/// Exit code of a successful run.
pub const EXIT_OK: i32 = 0;
/// Exit code of a numeric failure.
pub const EXIT_NUMERIC: i32 = 1;
/// Exit code of a usage error.
pub const EXIT_USAGE: i32 = 2;
/// Exit code of a failed validation.
pub const EXIT_VALIDATION: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Numeric(#[from] secrecy_core::Error),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Input rejected by the library's parameter checks.
    pub fn from_input(e: secrecy_core::Error) -> Self {
        CliError::Usage(e.to_string())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Numeric(secrecy_core::Error::InvalidParameter(_) | secrecy_core::Error::Unsupported(_)) => EXIT_USAGE,
            CliError::Numeric(_) | CliError::Io(_) => EXIT_NUMERIC,
            CliError::Validation(_) => EXIT_VALIDATION,
        }
    }
}

/// Runs the tool on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("secrecy: {e}");
            e.exit_code()
        }
    }
}
