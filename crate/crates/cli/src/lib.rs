//! Batch experiment runner for `gibbsdim`: configuration, orbit batches,
//! CSV output and the acceptance report.

pub mod commands;
pub mod config;
pub mod criteria;
pub mod experiments;
pub mod oracle;
pub mod output;

pub use commands::{execute, Subcommand, EXIT_CONFIG, EXIT_FAILED, EXIT_OK};
pub use config::{ConfigError, ExperimentConfig, Settings};
