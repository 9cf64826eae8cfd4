//! Command implementations behind the `mfgp` binary.

pub mod args;
pub mod commands;
pub mod config;

use args::{Cli, Command};
use mfgp_core::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Core(Error),
    /// Every repeat of a benchmark or sweep failed to fit.
    NoSuccessfulFit(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => e.fmt(f),
            CliError::NoSuccessfulFit(first) => write!(f, "no model could be fitted; first failure: {first}"),
        }
    }
}

impl std::error::Error for CliError {}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if !e.is_numerical() => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        }
    }
}

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Fit(a) => Ok(commands::cmd_fit(a)?),
        Command::Predict(a) => Ok(commands::cmd_predict(a)?),
        Command::SelectFeatures(a) => commands::cmd_select_features(a).map(|_| ()),
        Command::Benchmark(a) => commands::cmd_benchmark(a),
        Command::MakeSynthetic(a) => Ok(commands::cmd_make_synthetic(a)?),
        Command::Pca(a) => Ok(commands::cmd_pca(a)?),
    }
}
