//! Experiment harness around `qama-core`: synthetic instances, solver
//! benchmarks, mutation landscapes, forward reports and problem export.

pub mod args;
pub mod bench;
pub mod commands;
pub mod config;
pub mod error;
pub mod export;
pub mod instance;
pub mod landscape;
pub mod output;
pub mod report;

pub use args::{run, Cli};
pub use config::{BackendName, ExperimentConfig};
pub use error::{CliError, Result};
