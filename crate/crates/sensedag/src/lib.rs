//! Scenario harness, file formats and command-line tool for the joint
//! sensing and DAG inference scheduler in [`sensedag_core`].
//!
//! * [`config`]: scenario files and seeded scenario construction.
//! * [`harness`]: single runs, parameter sweeps and their CSV tables.
//! * [`bundle`]: result bundles and their validation.
//! * [`gantt`]: SVG timelines.
//! * [`cli`]: the `sensedag` command.

pub use sensedag_core as core;

pub mod bundle;
pub mod cli;
pub mod config;
pub mod gantt;
pub mod harness;

pub use config::ScenarioConfig;
pub use harness::{run_scenario, run_sweep, Axis, HarnessError, SweepResult, SweepSpec};
