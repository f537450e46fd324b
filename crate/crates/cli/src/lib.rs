//! Configuration, sweep orchestration and CSV output for the `bimodal` tool.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;

pub use config::{parse_config, Command, ResolvedRun, RunConfig};
pub use error::CliError;
pub use runner::{run, Manifest, RunOptions, RunSummary};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "BIMODAL_OUT_DIR";
