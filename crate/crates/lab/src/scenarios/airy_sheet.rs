//! Sheet marginal at unit time: increments in the two arguments carry
//! additive variance `2 * eps * (|x| + |y|)`, the two increment directions
//! are uncorrelated, and removing the parabola returns the stored sheet to
//! the raw kernel bit for bit.

use kpz_lab_core::landscape::{airy_sheet, sample_landscape_slice, ScalingParams};
use kpz_lab_core::rng::RngKey;
use kpz_lab_core::stats::{holder_seminorm_2d, increment_variance_profile};

use crate::config::ExperimentConfig;
use crate::formats::{samples_csv, write_artifact};
use crate::report::{check_band, check_le, correlation, ExperimentReport, Observation};
use crate::runner::replicate;
use crate::scenarios::symmetric_grid;
use crate::Result;

/// Increment endpoints in units of `eps`, as (start offset, end offset).
const PAIRS: [(f64, f64); 5] = [(0.0, 1.0), (1.0, 0.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0)];

struct Rep {
    diffs: Vec<f64>,
    u: f64,
    v: f64,
    parabola_gap: f64,
    holder2d: Vec<f64>,
}

fn one_rep(cfg: &ExperimentConfig, r: usize) -> kpz_lab_core::Result<Rep> {
    let params = ScalingParams::new(cfg.n)?;
    // Both sheet arguments are differenced, so both axes carry the
    // oversampled step; the windows stay a few multiples of eps wide.
    let grid = symmetric_grid(cfg.z_halfwidth, cfg.x_step())?;
    let key = RngKey::new(cfg.master_seed).stream(r as u64);

    let slice = sample_landscape_slice(params, 0.0, 1.0, &grid, &grid, key.substream(1))?;
    let sample = airy_sheet(&slice)?;
    let eps = cfg.epsilon_list[0];
    // Indices come from the requested grid, whose arithmetic is exact;
    // coordinates come from the slice's realized grids, which the x window
    // snaps onto the ensemble by up to half a step. The two differ by one
    // uniform shift, so indices agree and separations stay exact.
    let z_grid = *slice.z_grid();
    let x_grid = *slice.x_grid();
    let at = |z: f64, x: f64| -> kpz_lab_core::Result<f64> {
        Ok(sample.sheet[grid.index_of(z)?][grid.index_of(x)?])
    };

    let base = at(0.0, 0.0)?;
    let diffs = PAIRS
        .iter()
        .map(|&(z, x)| Ok(at(eps * z, eps * x)? - base))
        .collect::<kpz_lab_core::Result<Vec<f64>>>()?;
    let u = at(eps, 0.0)? - base;
    let v = at(0.0, eps)? - base;

    // The stored sheet must equal kernel plus parabola with the identical
    // float arithmetic, so the recomputed gap is exactly zero.
    let mut parabola_gap: f64 = 0.0;
    for i in 0..z_grid.count() {
        let z = z_grid.point(i)?;
        for j in 0..x_grid.count() {
            let x = x_grid.point(j)?;
            let expect = slice.value(i, j)? + (z - x) * (z - x);
            parabola_gap = parabola_gap.max((sample.sheet[i][j] - expect).abs());
        }
    }

    // The seminorm is all-pairs over a matrix, so it reads a coarse
    // subsampling of the sheet at the unrefined step.
    let stride = cfg.oversample;
    let coarse_count = (grid.count() - 1) / stride + 1;
    let coarse: Vec<Vec<f64>> = (0..coarse_count)
        .map(|i| (0..coarse_count).map(|j| sample.sheet[i * stride][j * stride]).collect())
        .collect();
    let coarse_grid =
        kpz_lab_core::grid::make_grid(grid.origin(), grid.step() * stride as f64, coarse_count)?;
    let window = (coarse_grid.origin(), coarse_grid.max_point());
    let holder2d = cfg
        .beta_list
        .iter()
        .map(|&beta| holder_seminorm_2d(&coarse, &coarse_grid, &coarse_grid, beta, window, window))
        .collect::<kpz_lab_core::Result<Vec<f64>>>()?;

    Ok(Rep { diffs, u, v, parabola_gap, holder2d })
}

pub fn run(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<ExperimentReport> {
    let eps = *cfg.epsilon_list.first().ok_or_else(|| {
        crate::LabError::Config("airy-sheet needs a nonempty epsilon list".into())
    })?;
    let reps = replicate(pool, cfg.replications, |r| one_rep(cfg, r))?;
    let n = reps.len();

    let mut checks = Vec::new();
    let mut observations = Vec::new();

    let batches: Vec<Vec<f64>> = (0..PAIRS.len())
        .map(|k| reps.iter().map(|rep| rep.diffs[k]).collect())
        .collect();
    let estimates = increment_variance_profile(&batches)?;
    for (k, &(z, x)) in PAIRS.iter().enumerate() {
        let want = 2.0 * eps * (z.abs() + x.abs());
        checks.extend(check_band(
            format!("pair_z{z}_x{x}_variance_ratio"),
            estimates[k].variance / want,
            0.7,
            1.3,
            "sheet increment variance over 2*eps*(|z|+|x|)",
        ));
        observations.push(Observation::new(
            format!("pair_z{z}_x{x}_variance"),
            estimates[k].variance,
            Some(estimates[k].stderr),
            n,
        ));
    }

    let us: Vec<f64> = reps.iter().map(|r| r.u).collect();
    let vs: Vec<f64> = reps.iter().map(|r| r.v).collect();
    let rho = correlation(&us, &vs);
    checks.push(check_le(
        "cross_increment_correlation_abs",
        rho.abs(),
        0.15,
        "first-argument vs second-argument increments",
    ));
    observations.push(Observation::new("cross_increment_correlation", rho, None, n));

    let parabola = reps.iter().map(|r| r.parabola_gap).fold(0.0_f64, f64::max);
    checks.push(check_le("parabola_identity_max_gap", parabola, 0.0, "sheet minus parabola is the kernel"));

    for (bi, &beta) in cfg.beta_list.iter().enumerate() {
        let hs: Vec<f64> = reps.iter().map(|r| r.holder2d[bi]).collect();
        let max = hs.iter().cloned().fold(0.0_f64, f64::max);
        let mean = hs.iter().sum::<f64>() / n as f64;
        observations.push(Observation::new(format!("holder2d_{beta}_mean"), mean, None, n));
        observations.push(Observation::new(format!("holder2d_{beta}_max"), max, None, n));
    }

    let columns: Vec<String> = PAIRS.iter().map(|(z, x)| format!("d_z{z}_x{x}")).collect();
    let mut column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    column_refs.push("u");
    column_refs.push("v");
    let rows: Vec<Vec<f64>> = reps
        .iter()
        .map(|r| {
            let mut row = r.diffs.clone();
            row.push(r.u);
            row.push(r.v);
            row
        })
        .collect();
    let artifacts = vec![write_artifact(
        &cfg.out_dir,
        "samples/sheet_increments.csv",
        &samples_csv(&column_refs, &rows),
    )?];

    Ok(ExperimentReport::new(cfg, checks, observations, artifacts))
}
