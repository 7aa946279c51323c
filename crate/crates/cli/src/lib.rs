//! Experiment runner: TOML experiment files in, CSV artifacts and a
//! checksummed run manifest out.

pub mod config;
pub mod output;
pub mod run;

pub use config::{parse_config, ConfigError, ExperimentConfig};
pub use run::{run, CliError, RunOptions, RunSummary, Subcommand};
