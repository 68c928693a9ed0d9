//! Command-line front end: configuration, orchestration and table output.

pub mod commands;
pub mod config;
pub mod error;
pub mod table;

pub use commands::{run_command, Command};
pub use config::{parse_config, parse_config_with, RunConfig};
pub use error::CliError;
pub use table::{export_table, Table};
