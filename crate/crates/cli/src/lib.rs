//! Experiment driver for `schatten-semigroup`: TOML configs in, JSON and CSV
//! reports out.

pub mod config;
pub mod experiments;
pub mod report;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::run_experiment;
pub use report::{Report, Verdict};

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "SEMIGROUP_OUT_DIR";
