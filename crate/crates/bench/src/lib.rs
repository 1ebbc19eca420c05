//! Experiment harness: data sources, regressor line-ups, error curves,
//! regret audits and cost profiles.

pub mod audit;
pub mod config;
pub mod cost;
pub mod error;
pub mod models;
pub mod run;
pub mod source;

pub use config::{ExperimentConfig, RegressorKind, RegressorSpec, SourceConfig};
pub use error::{BenchError, Result};
pub use run::{run_experiment, write_run_outputs, RunReport};
