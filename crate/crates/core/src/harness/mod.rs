//! Configuration, experiments, reports and the subcommands of the CLI.

mod commands;
pub mod config;
pub mod experiments;
pub mod report;

pub use commands::{run_command, Command};
pub use config::RunConfig;
pub use experiments::{run_experiment, EXPERIMENTS};
pub use report::{ExperimentReport, Output, VerdictEntry};
