//! Command implementations behind the `r2tr` binary. Each command returns
//! its data files as strings so runs can be compared byte for byte.

pub mod commands;
pub mod config;
pub mod presets;

pub use commands::{Artifact, Format, Report};
pub use config::{ConfigError, Experiment, ExperimentConfig};
