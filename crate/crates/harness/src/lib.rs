//! Experiment driver for the quantum-walk library: deterministic instance
//! generation, parallel sweeps, CSV output and summary reports.

pub mod checks;
pub mod config;
pub mod error;
pub mod experiments;
pub mod instances;
pub mod report;
pub mod run;
pub mod table;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use run::{run_experiment, RunOptions, RunSummary};
