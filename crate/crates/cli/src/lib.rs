//! Experiment harness behind the `multiconf` command.

pub mod charts;
pub mod config;
pub mod error;
pub mod harness;
pub mod hashing;

pub use config::{ExperimentConfig, Overrides};
pub use error::{HarnessError, Result};
pub use harness::{run_experiment, RunSummary};
