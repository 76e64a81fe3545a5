//! Experiment harness around `kpz-lab-core`: scenario configs, replicated
//! Monte Carlo runs, statistical checks, and deterministic reports.
//!
//! A scenario is a named bundle of samples and checks with calibrated
//! defaults. `runner::run_experiment` resolves the scenario, fans the
//! replications out over a thread pool whose size never affects the
//! numbers, and writes `report.json` plus CSV samples into the output
//! directory.

pub mod config;
pub mod formats;
pub mod plots;
pub mod report;
pub mod runner;
pub mod scenarios;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] kpz_lab_core::error::Error),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, LabError>;
