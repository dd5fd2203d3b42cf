//! Configuration parsing, experiment orchestration and tabular output.

pub mod config;
pub mod manifest;
pub mod run;

pub use config::{parse_config, parse_config_str, OutputFormat, RunConfig};
pub use manifest::{config_hash, format_sig, to_json, RunManifest, Table};
pub use run::{exit_code, run, RunOutcome, Subcommand, EXIT_ASSUMPTION, EXIT_ERROR, EXIT_NO_CONVERGENCE, EXIT_OK};
