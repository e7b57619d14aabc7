//! Benchmark harness for the `qkmm` command-line tool.
//!
//! Subcommands sweep dimensions, noise sources and bank sizes, write one CSV
//! row per trial (columns versioned in a leading comment line) and a JSON
//! summary with per-point means and standard deviations.

mod cli;
pub mod config;
pub mod error;
pub mod gatecount;
pub mod inputs;
pub mod output;
pub mod plots;
pub mod runner;

pub use cli::{run_cli, source_subsets};
pub use config::ExperimentConfig;
pub use error::{BenchError, Result};
