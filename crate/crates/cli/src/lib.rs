//! Command-line front end for `geophase`: single-point reports, parameter
//! sweeps to CSV, the claim scenarios and SVG plots of sweep output.

pub mod config;
pub mod error;
pub mod plot;
pub mod scenarios;
pub mod sweep;

pub use config::{Axis, BaseParams, Output, SweepSpec};
pub use error::CliError;
pub use scenarios::{run_scenario, Scenario, ScenarioOptions, ScenarioOutcome};
pub use sweep::{run_sweep, write_csv, ResultRow};
