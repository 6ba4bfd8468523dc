//! Experiment harness behind the `msmr` binary: sweep and admission
//! experiments over generated edge workloads, plus per-instance analysis
//! reports.

pub mod config;
pub mod experiment;
pub mod report;

pub use experiment::{
    derive_seed, run_admission, run_experiment, AxisValues, ExperimentRow, ExperimentSpec,
    Method,
};
