//! Command-line front end of the weighted Stein-Weiss laboratory.

pub mod commands;
pub mod config;
pub mod error;
pub mod suites;

pub use error::CliError;
