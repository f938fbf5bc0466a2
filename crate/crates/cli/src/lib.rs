//! Command-line front end: argument parsing, run configuration and the
//! three subcommands.

pub mod args;
pub mod config;
pub mod covid;
pub mod crisis;
pub mod diag;
pub mod error;
pub mod report;
pub mod svg;

use args::{Cli, Command};
use error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Artifacts written but some R-hat exceeds the threshold.
    NotConverged,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Success => 0,
            Outcome::NotConverged => 2,
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::FitCovid(a) => covid::run(&config::covid(a)?),
        Command::FitCrisis(a) => crisis::run(&config::crisis(a)?),
        Command::Diagnostics(a) => diag::run(a),
    }
}
