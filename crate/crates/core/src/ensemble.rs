//! Brownian line ensembles and two-sided Brownian motions on a grid.
//!
//! A [`LineEnsemble`] is `k` independent standard Brownian motions sampled at
//! the grid points, each pinned to zero at the first point. Line 1 is the top
//! line. Independence across lines is arranged through key derivation, not
//! sampling order: line `j` always draws from `key.child(j)`, so adding or
//! removing lines, or sampling them in parallel, never changes another line's
//! path.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::RngKey;

/// `k` independent Brownian paths on a common grid, pinned to zero at the
/// first grid point. `lines[0]` is line 1, the top line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineEnsemble {
    grid: Grid,
    lines: Vec<Vec<f64>>,
    key: RngKey,
}

/// Samples a `k`-line ensemble. Increments over a step of width `h` are
/// normal with mean zero and variance `h`.
pub fn sample_line_ensemble(grid: Grid, k: usize, key: RngKey) -> Result<LineEnsemble> {
    if k == 0 {
        return Err(Error::BadLineCount(k));
    }
    let sigma = grid.step().sqrt();
    let lines = (0..k)
        .map(|j| {
            let mut rng = key.child(j as u64).rng();
            let mut path = Vec::with_capacity(grid.count());
            let mut v = 0.0;
            path.push(v);
            for _ in 1..grid.count() {
                let z: f64 = rng.sample(StandardNormal);
                v += sigma * z;
                path.push(v);
            }
            path
        })
        .collect();
    Ok(LineEnsemble { grid, lines, key })
}

impl LineEnsemble {
    /// Wraps explicit paths, for fixtures and hand-built examples.
    pub fn from_lines(grid: Grid, lines: Vec<Vec<f64>>) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::BadLineCount(0));
        }
        for path in &lines {
            if path.len() != grid.count() {
                return Err(Error::LengthMismatch { got: path.len(), want: grid.count() });
            }
            if let Some(i) = path.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteValue(i));
            }
        }
        Ok(Self { grid, lines, key: RngKey::new(0) })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    /// Path of line `line`, 1-based with line 1 on top.
    pub fn line(&self, line: usize) -> Result<&[f64]> {
        if line == 0 || line > self.lines.len() {
            return Err(Error::LineOutOfRange { line, lines: self.lines.len() });
        }
        Ok(&self.lines[line - 1])
    }

    pub fn key(&self) -> RngKey {
        self.key
    }
}

/// Two-sided Brownian motion with drift on a grid, pinned to zero at the
/// grid point whose coordinate is zero.
///
/// Path value at point `i` is `drift * x_i + sqrt(diffusion) * W(x_i)` with
/// `W` a two-sided standard Brownian motion. The two sides grow from the pin
/// independently (`key.child(0)` rightward, `key.child(1)` leftward), so the
/// path left of zero does not depend on how far the grid extends right.
pub fn sample_two_sided_bm(
    grid: Grid,
    drift: f64,
    diffusion: f64,
    key: RngKey,
) -> Result<Vec<f64>> {
    if diffusion < 0.0 || !diffusion.is_finite() {
        return Err(Error::NegativeDiffusion(diffusion));
    }
    if !drift.is_finite() {
        return Err(Error::NonFiniteValue(0));
    }
    let pin = grid.index_of(0.0).map_err(|_| Error::OriginNotOnGrid)?;
    let h = grid.step();
    let sigma = (diffusion * h).sqrt();
    let mut path = vec![0.0; grid.count()];

    let mut right = key.child(0).rng();
    let mut v = 0.0;
    for i in pin + 1..grid.count() {
        let z: f64 = right.sample(StandardNormal);
        v += drift * h + sigma * z;
        path[i] = v;
    }
    let mut left = key.child(1).rng();
    v = 0.0;
    for i in (0..pin).rev() {
        let z: f64 = left.sample(StandardNormal);
        v += -drift * h + sigma * z;
        path[i] = v;
    }
    Ok(path)
}

/// One Brownian path with a pair of tilted copies `b(x) -+ mu * x` evaluated
/// on its grid. Both tilts share the same noise, which is what couples the
/// drifted comparisons downstream.
pub fn drifted_pair(grid: &Grid, b: &[f64], mu: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if b.len() != grid.count() {
        return Err(Error::LengthMismatch { got: b.len(), want: grid.count() });
    }
    if !mu.is_finite() {
        return Err(Error::NonFiniteValue(0));
    }
    let mut minus = Vec::with_capacity(b.len());
    let mut plus = Vec::with_capacity(b.len());
    for (i, &v) in b.iter().enumerate() {
        let x = grid.point(i)?;
        minus.push(v - mu * x);
        plus.push(v + mu * x);
    }
    Ok((minus, plus))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    fn grid() -> Grid {
        make_grid(-2.0, 0.01, 401).unwrap()
    }

    #[test]
    fn rejects_zero_lines() {
        assert_eq!(
            sample_line_ensemble(grid(), 0, RngKey::new(1)).unwrap_err(),
            Error::BadLineCount(0)
        );
    }

    #[test]
    fn sampling_is_deterministic_per_key() {
        let a = sample_line_ensemble(grid(), 3, RngKey::new(9).stream(4)).unwrap();
        let b = sample_line_ensemble(grid(), 3, RngKey::new(9).stream(4)).unwrap();
        assert_eq!(a, b);
        let c = sample_line_ensemble(grid(), 3, RngKey::new(9).stream(5)).unwrap();
        assert_ne!(a.line(1).unwrap(), c.line(1).unwrap());
    }

    #[test]
    fn lines_do_not_depend_on_line_count() {
        // key-derived streams: line 2 of a 2-line ensemble equals line 2 of
        // a 5-line ensemble under the same key
        let a = sample_line_ensemble(grid(), 2, RngKey::new(3)).unwrap();
        let b = sample_line_ensemble(grid(), 5, RngKey::new(3)).unwrap();
        assert_eq!(a.line(2).unwrap(), b.line(2).unwrap());
    }

    #[test]
    fn lines_are_pinned_and_indexed_from_one() {
        let e = sample_line_ensemble(grid(), 2, RngKey::new(1)).unwrap();
        assert_eq!(e.line(1).unwrap()[0], 0.0);
        assert_eq!(e.line(2).unwrap()[0], 0.0);
        assert!(e.line(0).is_err());
        assert!(e.line(3).is_err());
    }

    #[test]
    fn increment_variance_matches_step() {
        // variance of b(last) - b(first) over N keys should be the grid span;
        // with N = 10^4 the sample variance is within 5% at 3 sigma
        let g = make_grid(0.0, 0.04, 26).unwrap();
        let span = g.max_point();
        let n = 10_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for r in 0..n {
            let e = sample_line_ensemble(g, 1, RngKey::new(11).stream(r)).unwrap();
            let d = *e.line(1).unwrap().last().unwrap();
            sum += d;
            sumsq += d * d;
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!(
            (var / span - 1.0).abs() < 0.05,
            "variance {var} should be near {span}"
        );
    }

    #[test]
    fn lines_are_empirically_independent() {
        // correlation of endpoint increments across lines < 3 / sqrt(N)
        let g = make_grid(0.0, 0.1, 11).unwrap();
        let n = 10_000;
        let mut sum_xy = 0.0;
        let mut sum_x2 = 0.0;
        let mut sum_y2 = 0.0;
        for r in 0..n {
            let e = sample_line_ensemble(g, 2, RngKey::new(13).stream(r)).unwrap();
            let x = *e.line(1).unwrap().last().unwrap();
            let y = *e.line(2).unwrap().last().unwrap();
            sum_xy += x * y;
            sum_x2 += x * x;
            sum_y2 += y * y;
        }
        let corr = sum_xy / (sum_x2 * sum_y2).sqrt();
        assert!(corr.abs() < 3.0 / (n as f64).sqrt(), "corr {corr}");
    }

    #[test]
    fn from_lines_validates_shape() {
        let g = make_grid(0.0, 1.0, 3).unwrap();
        assert!(LineEnsemble::from_lines(g, vec![]).is_err());
        assert!(LineEnsemble::from_lines(g, vec![vec![0.0, 1.0]]).is_err());
        assert!(LineEnsemble::from_lines(g, vec![vec![0.0, f64::NAN, 1.0]]).is_err());
        let e = LineEnsemble::from_lines(g, vec![vec![0.0, 1.0, 5.0], vec![0.0, 3.0, 1.0]]).unwrap();
        assert_eq!(e.line(1).unwrap(), &[0.0, 1.0, 5.0]);
    }

    #[test]
    fn two_sided_bm_requires_zero_on_grid() {
        let g = make_grid(0.25, 0.5, 4).unwrap();
        assert_eq!(
            sample_two_sided_bm(g, 0.0, 1.0, RngKey::new(1)).unwrap_err(),
            Error::OriginNotOnGrid
        );
    }

    #[test]
    fn two_sided_bm_is_pinned_and_drifts_exactly_when_noiseless() {
        let g = make_grid(-1.0, 0.25, 9).unwrap();
        let mu = 1.5;
        let path = sample_two_sided_bm(g, mu, 0.0, RngKey::new(1)).unwrap();
        for i in 0..g.count() {
            let want = mu * g.point(i).unwrap();
            assert!(
                (path[i] - want).abs() < 1e-12,
                "index {i}: {} vs {want}",
                path[i]
            );
        }
    }

    #[test]
    fn two_sided_bm_left_side_ignores_right_extent() {
        let short = make_grid(-1.0, 0.25, 5).unwrap();
        let long = make_grid(-1.0, 0.25, 9).unwrap();
        let key = RngKey::new(21);
        let a = sample_two_sided_bm(short, 0.0, 1.0, key).unwrap();
        let b = sample_two_sided_bm(long, 0.0, 1.0, key).unwrap();
        assert_eq!(a[..5], b[..5]);
    }

    #[test]
    fn two_sided_bm_unit_time_variance_is_diffusion() {
        // Var[b(1)] ~ diffusion; with diffusion 2 and 10^4 replications the
        // sample variance lands within 10%
        let g = make_grid(-1.0, 0.05, 41).unwrap();
        let i1 = g.index_of(1.0).unwrap();
        let n = 10_000;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for r in 0..n {
            let p = sample_two_sided_bm(g, 0.0, 2.0, RngKey::new(5).stream(r)).unwrap();
            sum += p[i1];
            sumsq += p[i1] * p[i1];
        }
        let mean = sum / n as f64;
        let var = sumsq / n as f64 - mean * mean;
        assert!((var / 2.0 - 1.0).abs() < 0.1, "variance {var} should be near 2");
    }

    #[test]
    fn drifted_pair_shares_noise() {
        let g = make_grid(-1.0, 0.25, 9).unwrap();
        let b = sample_two_sided_bm(g, 0.0, 1.0, RngKey::new(2)).unwrap();
        let (minus, plus) = drifted_pair(&g, &b, 0.5).unwrap();
        for i in 0..g.count() {
            let x = g.point(i).unwrap();
            assert!((minus[i] - (b[i] - 0.5 * x)).abs() < 1e-15);
            assert!((plus[i] - (b[i] + 0.5 * x)).abs() < 1e-15);
        }
    }
}
