//! Configuration and experiment runners behind the `plastokit` binary.

pub mod commands;
pub mod config;

pub use commands::{load_model, run, run_file, Command, Outcome, RunOptions};
pub use config::ExperimentConfig;
