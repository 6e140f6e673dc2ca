//! Command-line front end: JSON file formats and the `qca` subcommands.

pub mod commands;
pub mod error;
pub mod files;

pub use commands::{run, Cli, Outcome};
pub use error::{CliError, CliResult};
