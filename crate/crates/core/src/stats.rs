//! Estimators and distribution gates for the laboratory.
//!
//! Everything here is a pure function of samples. Distributional claims are
//! converted into fixed numeric gates (KS distances, variance ratios, slope
//! differences in standard errors) evaluated at fixed seeds, so CI verdicts
//! are deterministic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::rng::RngKey;

/// A labeled batch of scalar observations with sampling provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    values: Vec<f64>,
    label: String,
    seed_record: RngKey,
}

impl SampleSet {
    pub fn new(values: Vec<f64>, label: impl Into<String>, seed_record: RngKey) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteValue(i));
        }
        Ok(Self { values, label: label.into(), seed_record })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn seed_record(&self) -> RngKey {
        self.seed_record
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    fn sorted(&self) -> Vec<f64> {
        let mut v = self.values.clone();
        v.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values"));
        v
    }
}

/// Sup distance between the two empirical CDFs. The merged walk advances
/// both samples past every tied value before measuring, which makes the
/// statistic exactly symmetric in its arguments.
pub fn ks_two_sample(a: &SampleSet, b: &SampleSet) -> Result<f64> {
    let xs = a.sorted();
    let ys = b.sorted();
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

fn gaussian_cdf(x: f64, mean: f64, variance: f64) -> f64 {
    0.5 * (1.0 + libm::erf((x - mean) / (2.0 * variance).sqrt()))
}

/// Sup distance between the empirical CDF and a Gaussian with the given
/// moments, measured on both sides of every jump.
pub fn ks_gaussian(a: &SampleSet, mean: f64, variance: f64) -> Result<f64> {
    if !(variance > 0.0) || !variance.is_finite() {
        return Err(Error::BadVariance(variance));
    }
    let xs = a.sorted();
    let n = xs.len() as f64;
    let mut d: f64 = 0.0;
    for (i, x) in xs.iter().enumerate() {
        let f = gaussian_cdf(*x, mean, variance);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    Ok(d)
}

// regularity is measured over the whole requested window, so unlike
// window_indices this refuses windows that stick out of the grid
fn covered_window(grid: &Grid, lo: f64, hi: f64) -> Result<(usize, usize)> {
    let slack = grid.step() * 1e-9;
    if lo < grid.origin() - slack || hi > grid.max_point() + slack {
        return Err(Error::WindowOutOfGrid { lo, hi });
    }
    grid.window_indices(lo, hi)
}

fn window_values(f: &GridFunction, lo: f64, hi: f64) -> Result<(Vec<f64>, f64)> {
    let grid = f.grid();
    let (first, last) = covered_window(grid, lo, hi)?;
    let mut values = Vec::with_capacity(last - first + 1);
    for i in first..=last {
        match f.eval(i)? {
            crate::grid::Extended::Finite(v) => values.push(v),
            crate::grid::Extended::MinusInf => return Err(Error::NonFiniteValue(i)),
        }
    }
    Ok((values, grid.step()))
}

/// Largest ratio `|f(x) - f(y)| / |x - y|^beta` over distinct grid points of
/// the window.
pub fn holder_seminorm(f: &GridFunction, beta: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::BadExponent(beta));
    }
    let (values, step) = window_values(f, lo, hi)?;
    Ok(holder_from_values(&values, step, beta))
}

fn holder_from_values(values: &[f64], step: f64, beta: f64) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    // one power evaluation per separation, not per pair
    let denom: Vec<f64> = (0..m).map(|d| (d as f64 * step).powf(beta)).collect();
    let mut best: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            best = best.max((values[i] - values[j]).abs() / denom[j - i]);
        }
    }
    best
}

/// Largest ratio `|f(p) - f(q)| / d(p, q)^beta` over distinct points of a
/// rectangular window of a matrix-valued field, with `d` the larger of the
/// two coordinate separations.
pub fn holder_seminorm_2d(
    values: &[Vec<f64>],
    z_grid: &Grid,
    x_grid: &Grid,
    beta: f64,
    z_window: (f64, f64),
    x_window: (f64, f64),
) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::BadExponent(beta));
    }
    if values.len() != z_grid.count() {
        return Err(Error::LengthMismatch { got: values.len(), want: z_grid.count() });
    }
    let (z0, z1) = covered_window(z_grid, z_window.0, z_window.1)?;
    let (x0, x1) = covered_window(x_grid, x_window.0, x_window.1)?;
    let mut points = Vec::with_capacity((z1 - z0 + 1) * (x1 - x0 + 1));
    for zi in z0..=z1 {
        let row = &values[zi];
        if row.len() != x_grid.count() {
            return Err(Error::LengthMismatch { got: row.len(), want: x_grid.count() });
        }
        for xi in x0..=x1 {
            if !row[xi].is_finite() {
                return Err(Error::NonFiniteValue(xi));
            }
            points.push((z_grid.point(zi)?, x_grid.point(xi)?, row[xi]));
        }
    }
    let mut best: f64 = 0.0;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let (za, xa, va) = points[i];
            let (zb, xb, vb) = points[j];
            let dist = (za - zb).abs().max((xa - xb).abs());
            if dist > 0.0 {
                best = best.max((va - vb).abs() / dist.powf(beta));
            }
        }
    }
    Ok(best)
}

/// Largest `|f(x) - f(y)|` over window pairs at most `delta` apart.
pub fn modulus_of_continuity(f: &GridFunction, delta: f64, lo: f64, hi: f64) -> Result<f64> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::BadDelta(delta));
    }
    let (values, step) = window_values(f, lo, hi)?;
    let reach = ((delta / step) * (1.0 + 1e-12)).floor() as usize;
    let mut best: f64 = 0.0;
    for i in 0..values.len() {
        for j in i + 1..values.len().min(i + reach + 1) {
            best = best.max((values[i] - values[j]).abs());
        }
    }
    Ok(best)
}

/// One per-offset variance estimate with a jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceEstimate {
    pub variance: f64,
    pub stderr: f64,
    pub n: usize,
}

/// Unbiased variances with jackknife standard errors, one estimate per
/// offset batch.
pub fn increment_variance_profile(samples: &[Vec<f64>]) -> Result<Vec<VarianceEstimate>> {
    samples
        .iter()
        .map(|batch| {
            let n = batch.len();
            if n < 30 {
                return Err(Error::TooFewReplications { got: n, want: 30 });
            }
            if let Some(i) = batch.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue(i));
            }
            let nf = n as f64;
            let mean = batch.iter().sum::<f64>() / nf;
            let centered: Vec<f64> = batch.iter().map(|v| v - mean).collect();
            let s2: f64 = centered.iter().map(|d| d * d).sum();
            let variance = s2 / (nf - 1.0);
            // leave-one-out variance from the centered sums in O(1) each
            let loo: Vec<f64> = centered
                .iter()
                .map(|d| (s2 - d * d * nf / (nf - 1.0)) / (nf - 2.0))
                .collect();
            let loo_mean = loo.iter().sum::<f64>() / nf;
            let se2: f64 =
                loo.iter().map(|v| (v - loo_mean) * (v - loo_mean)).sum::<f64>() * (nf - 1.0) / nf;
            Ok(VarianceEstimate { variance, stderr: se2.sqrt(), n })
        })
        .collect()
}

/// Central slope of the drift curve at one `+-a` pair, with paired
/// standard errors and the comparison against the mean argmax.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CentralSlope {
    pub a: f64,
    pub slope: f64,
    pub slope_stderr: f64,
    /// Mean of the per-replication difference (slope - argmax coordinate).
    pub slope_minus_ez: f64,
    pub slope_minus_ez_stderr: f64,
}

/// The estimated drift curve `m(a) = E max_z (f(z) + a z)` with the argmax
/// probe that tests differentiability at zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MCurve {
    pub a_values: Vec<f64>,
    pub m_hat: Vec<f64>,
    pub stderr: Vec<f64>,
    /// Mean rightmost argmax coordinate at `a = 0`.
    pub ez_hat: f64,
    pub ez_stderr: f64,
    /// One record per positive `a`, ascending.
    pub central_slopes: Vec<CentralSlope>,
    /// Per-replication second differences of `m` at interior `a`, mean and
    /// standard error; convexity means these are nonnegative up to noise.
    pub second_diff_mean: Vec<f64>,
    pub second_diff_stderr: Vec<f64>,
}

impl MCurve {
    /// Interior points whose second difference is below `-3` standard
    /// errors; zero for a curve that is convex up to noise.
    pub fn convexity_violations(&self) -> usize {
        self.second_diff_mean
            .iter()
            .zip(&self.second_diff_stderr)
            .filter(|(m, se)| **m < -3.0 * **se)
            .count()
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

fn validate_a_values(a_values: &[f64]) -> Result<()> {
    if a_values.is_empty() {
        return Err(Error::BadAGrid("empty".into()));
    }
    if !a_values.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::BadAGrid("not strictly ascending".into()));
    }
    if !a_values.contains(&0.0) {
        return Err(Error::BadAGrid("missing 0".into()));
    }
    for &a in a_values {
        if !a_values.iter().any(|b| (a + b).abs() <= 1e-12 * a.abs().max(1.0)) {
            return Err(Error::BadAGrid(format!("no partner for {a}")));
        }
    }
    Ok(())
}

/// Estimates the drift curve by replicated sampling: `sampler(r)` returns
/// the profile values on `z_coords` for replication `r`, and the curve
/// records `max_z (f(z) + a z)` per `a` along with the rightmost argmax at
/// `a = 0`. Slopes and second differences are paired per replication, so
/// their standard errors are tight.
pub fn m_curve<F>(
    z_coords: &[f64],
    a_values: &[f64],
    replications: usize,
    mut sampler: F,
) -> Result<MCurve>
where
    F: FnMut(usize) -> Result<Vec<f64>>,
{
    if z_coords.is_empty() {
        return Err(Error::EmptySample);
    }
    validate_a_values(a_values)?;
    if replications < 100 {
        return Err(Error::TooFewReplications { got: replications, want: 100 });
    }
    let na = a_values.len();
    let mut per_a: Vec<Vec<f64>> = vec![Vec::with_capacity(replications); na];
    let mut argmaxes: Vec<f64> = Vec::with_capacity(replications);
    for r in 0..replications {
        let f = sampler(r)?;
        if f.len() != z_coords.len() {
            return Err(Error::LengthMismatch { got: f.len(), want: z_coords.len() });
        }
        for (ai, &a) in a_values.iter().enumerate() {
            let mut best = f64::NEG_INFINITY;
            let mut arg = 0usize;
            for (zi, &z) in z_coords.iter().enumerate() {
                let c = f[zi] + a * z;
                if c >= best {
                    best = c;
                    arg = zi;
                }
            }
            per_a[ai].push(best);
            if a == 0.0 {
                argmaxes.push(z_coords[arg]);
            }
        }
    }

    let mut m_hat = Vec::with_capacity(na);
    let mut stderr = Vec::with_capacity(na);
    for batch in &per_a {
        let (m, se) = mean_and_stderr(batch);
        m_hat.push(m);
        stderr.push(se);
    }
    let (ez_hat, ez_stderr) = mean_and_stderr(&argmaxes);

    let mut central_slopes = Vec::new();
    for (ai, &a) in a_values.iter().enumerate() {
        if a <= 0.0 {
            continue;
        }
        let neg = a_values
            .iter()
            .position(|b| (a + b).abs() <= 1e-12 * a.abs().max(1.0))
            .expect("validated symmetric");
        let slopes: Vec<f64> = (0..replications)
            .map(|r| (per_a[ai][r] - per_a[neg][r]) / (2.0 * a))
            .collect();
        let diffs: Vec<f64> = slopes.iter().zip(&argmaxes).map(|(s, z)| s - z).collect();
        let (slope, slope_stderr) = mean_and_stderr(&slopes);
        let (dm, dse) = mean_and_stderr(&diffs);
        central_slopes.push(CentralSlope {
            a,
            slope,
            slope_stderr,
            slope_minus_ez: dm,
            slope_minus_ez_stderr: dse,
        });
    }

    let mut second_diff_mean = Vec::new();
    let mut second_diff_stderr = Vec::new();
    for ai in 1..na.saturating_sub(1) {
        let d2: Vec<f64> = (0..replications)
            .map(|r| per_a[ai + 1][r] - 2.0 * per_a[ai][r] + per_a[ai - 1][r])
            .collect();
        let (m, se) = mean_and_stderr(&d2);
        second_diff_mean.push(m);
        second_diff_stderr.push(se);
    }

    Ok(MCurve {
        a_values: a_values.to_vec(),
        m_hat,
        stderr,
        ez_hat,
        ez_stderr,
        central_slopes,
        second_diff_mean,
        second_diff_stderr,
    })
}
