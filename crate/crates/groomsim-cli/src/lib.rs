//! Command-line front end for the groomsim simulator.
//!
//! Exit codes: 0 on success, 1 on usage/validation errors, 2 on
//! runtime/persistence errors.

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::{CommandFactory, FromArgMatches};

pub mod args;
pub mod commands;
pub mod config;

use args::{Cli, Command};

#[derive(Debug)]
pub enum CliError {
    /// Bad invocation or bad inputs: flag errors, malformed configs,
    /// violated parameter bounds. Exit code 1.
    Usage(String),
    /// Failures while doing the work, typically I/O. Exit code 2.
    Runtime(String),
}

/// Parses `argv` (including the program name) and runs the selected
/// subcommand, returning the process exit status.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match Cli::command().try_get_matches_from(argv) {
        Ok(matches) => matches,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return code;
        }
    };
    let cli = Cli::from_arg_matches(&matches).expect("matches conform to the CLI definition");
    let (_, sub) = matches.subcommand().expect("subcommand is required");
    let outcome = match cli.command {
        Command::Run(run_args) => commands::run(run_args, sub),
        Command::Sweep(sweep_args) => commands::sweep(sweep_args, sub),
        Command::Agos(agos_args) => commands::agos(agos_args, sub),
        Command::Orbit(orbit_args) => commands::orbit(orbit_args, sub),
        Command::Analyze(analyze_args) => commands::analyze(analyze_args, sub),
    };
    match outcome {
        Ok(()) => 0,
        Err(CliError::Usage(message)) => {
            eprintln!("error: {message}");
            1
        }
        Err(CliError::Runtime(message)) => {
            eprintln!("error: {message}");
            2
        }
    }
}
