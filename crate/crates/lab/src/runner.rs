//! Replicated execution with thread-count-independent results.

use std::time::Instant;

use rayon::prelude::*;

use crate::config::ExperimentConfig;
use crate::report::ExperimentReport;
use crate::{LabError, Result};

/// Builds a dedicated pool so `--threads` controls parallelism without
/// touching the global rayon state (tests run several pools side by side).
pub fn build_pool(threads: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::Config(format!("thread pool: {e}")))
}

/// Runs `f(0..replications)` on the pool and collects results in
/// replication order. Each call must derive its randomness from the
/// replication index alone, so the outcome is a pure function of the
/// config and the partitioning across threads is invisible.
pub fn replicate<T, F>(pool: &rayon::ThreadPool, replications: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> kpz_lab_core::Result<T> + Sync,
{
    let out: kpz_lab_core::Result<Vec<T>> =
        pool.install(|| (0..replications).into_par_iter().map(|r| f(r)).collect());
    Ok(out?)
}

/// Resolves the scenario, runs it, and writes the report and its sidecars
/// into `cfg.out_dir`. The report content depends only on the config.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let run = crate::scenarios::lookup(&cfg.scenario)
        .ok_or_else(|| LabError::Config(format!("unknown scenario `{}`", cfg.scenario)))?;
    let pool = build_pool(cfg.threads)?;
    let started = Instant::now();
    let report = run(cfg, &pool)?;
    report.write(&cfg.out_dir, started.elapsed())?;
    Ok(report)
}
