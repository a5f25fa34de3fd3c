//! Experiment runner for condor: manifests, run matrices and reports.

pub mod config;
pub mod format;
pub mod matrix;
pub mod report;

pub use config::{parse_config, parse_config_str, ConfigError, RunManifest};
pub use matrix::{run_matrix, MatrixOutcome};
pub use report::report;
