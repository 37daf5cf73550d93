//! Command-line front end for skew-normal PMC inference.

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod study;

pub use config::RunConfig;
pub use error::{CliError, CliResult};
