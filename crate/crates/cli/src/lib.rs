//! Command-line front end for the `krein-pt` library: configuration,
//! command dispatch and deterministic CSV/JSON output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod report;

pub use commands::{run_command, Command};
pub use config::{load_config, parse_config, ConfigError, RunConfig};
pub use error::CliError;
