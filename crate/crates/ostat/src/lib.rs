//! Experiment driver for `ostat-core`: configuration files, parallel
//! replication, CSV/JSON output and the subcommands behind the `ostat`
//! binary.

pub mod cli;
pub mod commands;
pub mod config;
pub mod runner;

pub use commands::Outcome;
pub use config::{ConfigError, ExperimentConfig};
