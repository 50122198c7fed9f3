//! Experiment driver for `sasaki-calib`: config loading, the four
//! experiments, fault injection and report writing.

pub mod config;
pub mod experiments;
pub mod fault;
pub mod report;

pub use config::{Experiment, ExperimentConfig};
pub use experiments::run;
pub use fault::Fault;
pub use report::{Check, Report};
