//! Command-line front end: config resolution, mode dispatch and table
//! writers for the `qbat` binary.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

pub use config::{resolve, ConfigFile, Flags, Mode, RunConfig};
pub use error::{CliError, CliResult};
pub use run::{execute, main_with_args};
