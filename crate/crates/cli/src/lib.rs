//! Experiment harness: configuration, parallel scans and row output.

pub mod config;
pub mod error;
pub mod output;
pub mod scan;

pub use config::{ExperimentConfig, Scenario, Tolerances};
pub use error::CliError;
pub use output::{Format, ScanRow};
pub use scan::{run, ScanOutcome, Summary};
