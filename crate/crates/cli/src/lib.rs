//! Scenario runner for `weylstrip-core`: reads a JSON scenario, runs one of
//! the pipelines over a list of spectral points and writes a JSON or CSV report.

pub mod config;
pub mod error;
pub mod report;
pub mod run;

pub use config::{Format, Mode, ScenarioConfig};
pub use error::CliError;
pub use report::{Record, Report};
pub use run::run_scenario;
