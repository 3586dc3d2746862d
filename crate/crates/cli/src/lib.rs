//! Command-line front end: subcommands over the engines, certificate files
//! with replay, and the regression fixtures.

pub mod cli;
pub mod error;
pub mod file;
pub mod fixtures;
pub mod run;

pub use cli::Cli;
pub use error::CliError;
pub use file::{CertificateFile, Payload, ReplayStatus};
pub use run::run;
