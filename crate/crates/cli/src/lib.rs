//! Experiment harness for extremum-seeking learning dynamics: config files,
//! the `simulate`, `compare`, `landscape` and `verify` experiments, and
//! their CSV reports.

pub mod config;
pub mod error;
pub mod experiment;
pub mod report;

pub use config::Config;
pub use error::{ConfigError, RunError};
