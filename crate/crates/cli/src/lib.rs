//! Command-line front end and file formats for `sparsemap-core`: JSON config
//! loading, the parallel Monte Carlo runner, JSON-lines/JSON/CSV emitters and
//! the subcommand implementations.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use error::CliError;
