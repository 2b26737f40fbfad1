//! Configuration-driven experiments on top of `twoinf-core`: seeded Monte
//! Carlo replicates, bound checks, constant calibration and regime sweeps,
//! all written as CSV.
//!
//! Results are a pure function of the config and the master seed. Replicate
//! `k` draws from `derive_seed(master_seed, k)`, replicates run on a rayon
//! pool, and rows are sorted by `(replicate, mode)` before writing, so the
//! thread count never changes the output.

pub mod calibrate;
pub mod config;
pub mod dump;
pub mod output;
pub mod runner;
pub mod stats;
pub mod sweep;

pub use config::{ExperimentConfig, Purpose, ScenarioKind};
pub use runner::{run_experiment, ReplicateRow};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),
    #[error("{0}")]
    Runtime(String),
}

impl BenchError {
    /// Process exit code: 2 for configuration errors, 3 for failures while
    /// running.
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Runtime(_) => 3,
        }
    }
}
