//! File formats, commands and demos behind the `localham` binary.

pub mod commands;
pub mod demo;
pub mod error;
pub mod files;

pub use commands::Outcome;
pub use error::{CliError, CliResult};
