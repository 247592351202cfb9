//! Experiment runner behind the `predict` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod table;

pub use commands::run;
pub use config::{Command, ConfigError, RunConfig};
pub use error::CliError;
