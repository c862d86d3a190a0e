//! Command-line front end. [`run`] parses arguments, executes one subcommand
//! and returns the process exit code.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;

pub mod args;
mod commands;

use args::{Cli, Command};

/// Success, including physically undefined results.
pub const EXIT_OK: i32 = 0;
/// Malformed or out-of-range arguments.
pub const EXIT_USAGE: i32 = 1;
/// Unreadable, unwritable or unfittable data.
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(text.as_bytes());
            return code;
        }
    };
    let result = match &cli.command {
        Command::PhaseSweep(a) => commands::phase_sweep(a, stdout),
        Command::Interferogram(a) => commands::interferogram(a, stdout),
        Command::Eraser(a) => commands::eraser(a, stdout),
        Command::GeometryCheck(a) => commands::geometry_check(a, stdout),
        Command::Fit(a) => commands::fit(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
