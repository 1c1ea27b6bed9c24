//! Configuration parsing, experiment dispatch and report writing for the
//! `intermap-lab` binary.

pub mod config;
pub mod report;
pub mod run;

pub use config::{parse_config, ConfigError, Experiment, ExperimentConfig, Overrides};
pub use report::{emit_report, load_report, write_series, ReportError, RunStamp, Summary};
pub use run::{execute, outcome_code, run_experiment, RunError};
