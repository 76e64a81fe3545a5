//! The tilt probe `m(a) = E max_z (f(z) + a z)`: its derivative at zero
//! exists exactly when the argmax is almost surely unique, and then equals
//! the mean argmax. Deterministic fixtures pin the two extremes (smooth
//! parabola, two-peak kink); random cases check slope-equals-mean-argmax
//! through paired central differences, plus convexity of the curve.

use kpz_lab_core::ensemble::sample_two_sided_bm;
use kpz_lab_core::grid::Grid;
use kpz_lab_core::landscape::{sample_landscape_slice, ScalingParams};
use kpz_lab_core::rng::RngKey;
use kpz_lab_core::stats::{m_curve, MCurve};

use crate::config::{ExperimentConfig, InitialData};
use crate::formats::{samples_csv, write_artifact};
use crate::plots::{line_plot, Series};
use crate::report::{check_ge, check_le, ExperimentReport, Observation};
use crate::runner::replicate;
use crate::scenarios::{build_initial, symmetric_grid};
use crate::Result;

const A_VALUES: [f64; 5] = [-0.1, -0.05, 0.0, 0.05, 0.1];

/// One-sided slopes around zero from the fitted curve.
fn kink_gap(curve: &MCurve) -> f64 {
    let i0 = curve.a_values.iter().position(|&a| a == 0.0).expect("grid contains zero");
    let da_r = curve.a_values[i0 + 1] - curve.a_values[i0];
    let da_l = curve.a_values[i0] - curve.a_values[i0 - 1];
    let right = (curve.m_hat[i0 + 1] - curve.m_hat[i0]) / da_r;
    let left = (curve.m_hat[i0] - curve.m_hat[i0 - 1]) / da_l;
    right - left
}

fn curve_csv(curve: &MCurve) -> String {
    let rows: Vec<Vec<f64>> = curve
        .a_values
        .iter()
        .zip(&curve.m_hat)
        .zip(&curve.stderr)
        .map(|((&a, &m), &se)| vec![a, m, se])
        .collect();
    samples_csv(&["a", "m_hat", "stderr"], &rows)
}

fn curve_series(label: &str, curve: &MCurve) -> Series {
    Series {
        label: label.to_string(),
        points: curve.a_values.iter().cloned().zip(curve.m_hat.iter().cloned()).collect(),
    }
}

pub fn run(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<ExperimentReport> {
    let mut checks = Vec::new();
    let mut observations = Vec::new();
    let mut artifacts = Vec::new();

    // Smooth deterministic case: unique argmax, slope and mean argmax both
    // exactly zero, curve a^2 / 4 strictly convex.
    let z_fine: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 * 0.01).collect();
    let parabola = m_curve(&z_fine, &A_VALUES, 100, |_| {
        Ok(z_fine.iter().map(|z| -z * z).collect())
    })?;
    let slope0 = parabola.central_slopes[0].slope;
    checks.push(check_le("parabola_slope_abs", slope0.abs(), 1e-12, "derivative at zero"));
    checks.push(check_le("parabola_ez_abs", parabola.ez_hat.abs(), 1e-12, "mean argmax"));
    checks.push(check_le(
        "parabola_convexity_violations",
        parabola.convexity_violations() as f64,
        0.0,
        "second differences nonnegative",
    ));

    // Two equal peaks: the argmax jumps across zero tilt, so the one-sided
    // slopes differ by the peak separation and the curve has a kink.
    let twin = m_curve(&z_fine, &A_VALUES, 100, |_| {
        Ok(z_fine.iter().map(|z| -(z + 1.0).abs().min((z - 1.0).abs())).collect())
    })?;
    checks.push(check_ge("two_peak_kink_gap", kink_gap(&twin), 1.5, "one-sided slopes split"));

    // Brownian minus parabola: almost surely unique argmax, so the paired
    // difference between the central slope and the mean argmax vanishes
    // within Monte Carlo error, and the curve stays convex.
    let z_wide: Vec<f64> = (0..=200).map(|i| -2.0 + i as f64 * 0.02).collect();
    let wide_grid = symmetric_grid(2.0, 0.02)?;
    let key = RngKey::new(cfg.master_seed);
    let brownian = m_curve(&z_wide, &A_VALUES, cfg.replications, |r| {
        let b = sample_two_sided_bm(wide_grid, 0.0, 2.0, key.stream(r as u64).substream(1))?;
        Ok(b.iter().zip(&z_wide).map(|(v, z)| v - z * z).collect())
    })?;
    report_random_case("brownian_parabola", &brownian, cfg.replications, &mut checks, &mut observations);

    // The same probe through the sampled kernel: initial data plus one
    // kernel column, replicated over landscape draws.
    let params = ScalingParams::new(cfg.n)?;
    let z_grid = symmetric_grid(cfg.z_halfwidth, cfg.grid_step)?;
    let x_grid = symmetric_grid(cfg.grid_step, cfg.grid_step)?;
    let x0 = x_grid.index_of(0.0)?;
    let z_coords = z_grid.points();
    let column_reps = cfg.replications.min(500);
    let columns = replicate(pool, column_reps, |r| {
        landscape_column(cfg, params, &z_grid, &x_grid, x0, r)
    })?;
    let column = m_curve(&z_coords, &A_VALUES, column_reps, |r| Ok(columns[r].clone()))?;
    report_random_case("landscape_column", &column, column_reps, &mut checks, &mut observations);

    artifacts.push(write_artifact(&cfg.out_dir, "samples/m_curve_parabola.csv", &curve_csv(&parabola))?);
    artifacts.push(write_artifact(&cfg.out_dir, "samples/m_curve_two_peak.csv", &curve_csv(&twin))?);
    artifacts.push(write_artifact(&cfg.out_dir, "samples/m_curve_brownian.csv", &curve_csv(&brownian))?);
    artifacts.push(write_artifact(&cfg.out_dir, "samples/m_curve_column.csv", &curve_csv(&column))?);
    let plot = line_plot(
        "tilt probe m(a)",
        &[
            curve_series("parabola", &parabola),
            curve_series("two peaks", &twin),
            curve_series("brownian - z^2", &brownian),
            curve_series("kernel column", &column),
        ],
    );
    artifacts.push(write_artifact(&cfg.out_dir, "plots/m_curve.svg", &plot)?);

    Ok(ExperimentReport::new(cfg, checks, observations, artifacts))
}

fn landscape_column(
    cfg: &ExperimentConfig,
    params: ScalingParams,
    z_grid: &Grid,
    x_grid: &Grid,
    x0: usize,
    r: usize,
) -> kpz_lab_core::Result<Vec<f64>> {
    let key = RngKey::new(cfg.master_seed).stream(r as u64).substream(2);
    let slice = sample_landscape_slice(params, 0.0, cfg.t, z_grid, x_grid, key)?;
    let h = build_initial(InitialData::Brownian, z_grid, key.child(1))?;
    let hv = h.realized().as_f64_vec();
    (0..z_grid.count()).map(|i| Ok(hv[i] + slice.value(i, x0)?)).collect()
}

fn report_random_case(
    name: &str,
    curve: &MCurve,
    n: usize,
    checks: &mut Vec<crate::report::CheckRecord>,
    observations: &mut Vec<Observation>,
) {
    let c = &curve.central_slopes[0];
    checks.push(check_le(
        format!("{name}_slope_vs_ez"),
        c.slope_minus_ez.abs(),
        2.0 * c.slope_minus_ez_stderr,
        "paired central slope minus mean argmax",
    ));
    checks.push(check_le(
        format!("{name}_convexity_violations"),
        curve.convexity_violations() as f64,
        0.0,
        "second differences within three standard errors of nonnegative",
    ));
    observations.push(Observation::new(format!("{name}_slope"), c.slope, Some(c.slope_stderr), n));
    observations.push(Observation::new(
        format!("{name}_ez_hat"),
        curve.ez_hat,
        Some(curve.ez_stderr),
        n,
    ));
}
