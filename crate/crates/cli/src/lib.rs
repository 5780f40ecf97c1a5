//! Batch experiment runner for the `exchange-core` samplers.
//!
//! An experiment expands a configuration into sweep points (algorithm, `K`,
//! `theta_hat`, proposal width), runs `n_replicates` seeded chains at each,
//! and tabulates acceptance rate, effective sample size and work counts.

pub mod config;
pub mod harness;
pub mod output;

use std::path::PathBuf;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use harness::{
    generate_ising_data, replicate_seed, replicate_trace, run_experiment, sweep_points, BuiltModel,
    RunOptions, SweepPoint, SweepResult, SweepRow,
};
pub use output::{emit_csv, emit_detail, read_csv, write_csv};

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{0}")]
    Validation(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error(transparent)]
    Core(#[from] exchange_core::Error),
}

impl HarnessError {
    /// 1 for invalid input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation(_) => 1,
            HarnessError::Core(exchange_core::Error::Config(_)) => 1,
            _ => 2,
        }
    }
}
