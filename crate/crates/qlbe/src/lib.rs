//! Experiment runner on top of `qlbe-core`: versioned configuration files,
//! parallel trajectory ensembles with thread-count independent results, and
//! CSV plus JSON metadata output.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod experiments;
pub mod output;

pub use config::{parse_config, ExperimentConfig, Kind, Units};
pub use error::{Result, RunError};
pub use experiments::{execute, run, Artifacts, Outcome, RunOptions};
