//! Command-line front end of the weak-strong cluster benchmark.
//!
//! Each subcommand lives in its own module and is callable as a library
//! function; [`app::main_with_args`] parses arguments and maps failures onto
//! exit codes (1 usage, 2 I/O, 3 validation).

pub mod analysis;
pub mod app;
pub mod bench;
pub mod error;
pub mod fit;
pub mod generate;
pub mod import;
pub mod landscape;
pub mod report;
pub mod solve;
pub mod tts;
pub mod twolevel;

pub use error::{CliError, CliResult};
