//! Experiment harness: configuration files, results bundles, SVG
//! histograms and the subcommands of the `netctl` binary.

pub mod bundle;
pub mod config;
pub mod error;
pub mod run;
pub mod svg;

pub use config::{load_config, parse_config, RunSettings};
pub use error::CliError;
pub use run::{run, run_command, Cli, Command, RunConfig};
