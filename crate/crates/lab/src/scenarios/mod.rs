//! Named experiment scenarios.
//!
//! Each scenario turns a config into replicated samples, reduces them in
//! replication order, and emits checks with calibrated thresholds plus CSV
//! artifacts. Scenario functions never read wall-clock time or thread
//! state, so a report is a pure function of its config.

mod airy_sheet;
mod argmax_uniqueness;
mod geometry;
mod invariance_123;
mod local_brownian;
mod long_time_coupling;

use kpz_lab_core::grid::{make_grid, Grid};
use kpz_lab_core::rng::RngKey;
use kpz_lab_core::semigroup::{make_initial, InitialCondition, InitialKind};

use crate::config::{ExperimentConfig, InitialData};
use crate::report::ExperimentReport;
use crate::Result;

pub type ScenarioFn = fn(&ExperimentConfig, &rayon::ThreadPool) -> Result<ExperimentReport>;

/// Registered scenario names, sorted.
pub const SCENARIOS: [&str; 6] = [
    "airy-sheet",
    "argmax-uniqueness",
    "geometry",
    "invariance-123",
    "local-brownian",
    "long-time-coupling",
];

pub fn lookup(name: &str) -> Option<ScenarioFn> {
    match name {
        "airy-sheet" => Some(airy_sheet::run),
        "argmax-uniqueness" => Some(argmax_uniqueness::run),
        "geometry" => Some(geometry::run),
        "invariance-123" => Some(invariance_123::run),
        "local-brownian" => Some(local_brownian::run),
        "long-time-coupling" => Some(long_time_coupling::run),
        _ => None,
    }
}

/// Symmetric grid over `[-halfwidth, halfwidth]` with the given step. The
/// halfwidth is rounded up to a whole number of steps so the window is
/// always covered and the origin is an exact multiple of the step.
pub fn symmetric_grid(halfwidth: f64, step: f64) -> kpz_lab_core::Result<Grid> {
    let half_steps = ((halfwidth / step) - 1e-9).ceil().max(1.0) as usize;
    make_grid(-(half_steps as f64) * step, step, 2 * half_steps + 1)
}

/// Builds the configured initial condition on `grid`; Brownian data is
/// drawn from `key` (diffusion 2, pinned at the origin).
pub fn build_initial(
    kind: InitialData,
    grid: &Grid,
    key: RngKey,
) -> kpz_lab_core::Result<InitialCondition> {
    let k = match kind {
        InitialData::Flat => InitialKind::Flat,
        InitialData::NarrowWedge => InitialKind::NarrowWedge { apex: 0.0 },
        InitialData::Brownian => InitialKind::Brownian { drift: 0.0, diffusion: 2.0, key },
        InitialData::Power(z) => InitialKind::Power { exponent: z },
    };
    make_initial(k, grid)
}
