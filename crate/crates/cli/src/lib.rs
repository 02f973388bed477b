//! Scenario files, built-in scenarios, batch runner and report writers.

pub mod builtins;
pub mod config;
pub mod fuzz;
pub mod report;
pub mod runner;
pub mod svg;

pub use config::{ConfigError, ScenarioConfig};
pub use runner::{batch_status, run_batch, run_config, Overrides, ScenarioRun, Status};
