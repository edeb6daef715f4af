//! Library side of the `capsketch` command-line tool.

pub mod commands;
pub mod error;
pub mod file;
pub mod input;

pub use error::{CliError, CliResult};
pub use file::SketchFile;
