//! Experiment driver for `crlab`: one subcommand per construction, flat
//! `key = value` configs, seeded runs and CSV/JSON artifacts.
//!
//! Random sampling uses `ChaCha8Rng::seed_from_u64(seed)`: stream 0 drives
//! the point clouds, stream 1 the test polynomials of the maximum-principle
//! check.

pub mod config;
pub mod report;
pub mod run;

use thiserror::Error;

pub use config::{Command, ExperimentConfig};
pub use report::{emit_report, Artifact, Format, Json, Table};
pub use run::{criteria_listing, run_experiment, Outcome, CATALOG};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Module(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 2 for usage errors, 1 for everything a run reports as a failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}
