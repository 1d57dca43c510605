//! Library half of the `railsense` command-line tool: configuration
//! handling and the command implementations, kept callable so integration
//! tests can drive them without spawning processes.

pub mod commands;
pub mod config;
pub mod error;

pub use commands::GlobalArgs;
pub use config::ExperimentConfig;
pub use error::CliError;
