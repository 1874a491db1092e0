//! Configuration, orchestration and file output for the `nullwave` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod io;
pub mod sweep;

pub use error::{CliError, Result};
