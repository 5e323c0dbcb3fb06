//! Experiment configuration, batch runner and acceptance suite behind the
//! `walks` binary.

pub mod config;
pub mod experiment;
pub mod validate;

pub use config::{ConfigError, ExperimentConfig, GraphSource, Protocol, SEED_ENV};
pub use experiment::{execute, run_experiment, write_artifacts, Records, ResultsFile, ScalingReport};
pub use validate::{run_suite, run_suite_with, CriterionReport, Level, ValidationReport};
