//! Experiment runner: configuration files, bundled presets, analytic and
//! Monte Carlo sweeps, and CSV tables.

pub mod config;
pub mod presets;
pub mod run;
pub mod table;
pub mod validate;

pub use config::{ConfigError, ExperimentConfig, Mode, Overrides, Plan};
pub use run::{run, RunError};
pub use table::{Provenance, Row, SweepTable};
