//! Uniform spatial grids and partial functions on them.
//!
//! All samplers and kernels work on a shared uniform grid so that coupling
//! between objects is exact: two functions on the same [`Grid`] agree about
//! where point `i` is to the last bit. Profiles that are minus infinity on
//! part of the grid (narrow wedges, restricted maxima) are carried by
//! [`GridFunction`] with an explicit [`Extended`] tag rather than a NaN or a
//! sentinel float, so invalid values cannot leak into arithmetic unnoticed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `origin + i * step` for `i` in `0..count`.
///
/// Fields are private so every constructed grid satisfies `step > 0` and
/// `count >= 2`; points are always computed as `origin + i * step` (never by
/// accumulation) so the grid is exactly reproducible from its description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    origin: f64,
    step: f64,
    count: usize,
}

/// Builds a grid, rejecting degenerate descriptions.
pub fn make_grid(origin: f64, step: f64, count: usize) -> Result<Grid> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::NonPositiveStep(step));
    }
    if count < 2 {
        return Err(Error::CountTooSmall(count));
    }
    if !origin.is_finite() {
        return Err(Error::BadOrigin(origin));
    }
    Ok(Grid { origin, step, count })
}

impl Grid {
    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn count(&self) -> usize {
        self.count
    }

    /// Coordinate of point `i`.
    pub fn point(&self, i: usize) -> Result<f64> {
        if i >= self.count {
            return Err(Error::IndexOutOfRange { index: i, count: self.count });
        }
        Ok(self.origin + i as f64 * self.step)
    }

    /// All coordinates in index order.
    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.origin + i as f64 * self.step).collect()
    }

    /// Index of the grid point nearest to `x`, clamped to the grid.
    pub fn nearest_index(&self, x: f64) -> usize {
        let raw = (x - self.origin) / self.step;
        if raw <= 0.0 {
            return 0;
        }
        let i = raw.round() as usize;
        i.min(self.count - 1)
    }

    /// Index of the grid point equal to `x` up to half a step; errors if `x`
    /// falls between points or outside the grid.
    pub fn index_of(&self, x: f64) -> Result<usize> {
        let i = self.nearest_index(x);
        let p = self.origin + i as f64 * self.step;
        if (x - p).abs() > self.step * 0.25 {
            return Err(Error::PointNotOnGrid(x));
        }
        Ok(i)
    }

    /// Indices whose coordinates lie in `[lo, hi]`, with a half-ulp of slack
    /// so window edges that coincide with points are included.
    pub fn window_indices(&self, lo: f64, hi: f64) -> Result<(usize, usize)> {
        if lo > hi {
            return Err(Error::WindowOutOfGrid { lo, hi });
        }
        let slack = self.step * 1e-9;
        let first = (0..self.count).find(|&i| self.origin + i as f64 * self.step >= lo - slack);
        let last = (0..self.count).rfind(|&i| self.origin + i as f64 * self.step <= hi + slack);
        match (first, last) {
            (Some(a), Some(b)) if a <= b => Ok((a, b)),
            _ => Err(Error::WindowOutOfGrid { lo, hi }),
        }
    }

    /// Last point of the grid.
    pub fn max_point(&self) -> f64 {
        self.origin + (self.count - 1) as f64 * self.step
    }
}

/// Value of a partial function at a grid point: finite, or minus infinity
/// where the function is undefined (left of a wedge apex, outside a window).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Extended {
    MinusInf,
    Finite(f64),
}

impl Extended {
    /// Raw float for kernels that run max-plus arithmetic directly;
    /// minus infinity maps to `f64::NEG_INFINITY`, which is absorbing
    /// under `max` and `+` exactly as the tag is.
    pub fn as_f64(self) -> f64 {
        match self {
            Extended::MinusInf => f64::NEG_INFINITY,
            Extended::Finite(v) => v,
        }
    }

    /// Tags a raw float back; anything non-finite below zero is minus
    /// infinity, NaN and plus infinity are rejected by callers up front.
    pub fn from_f64(v: f64) -> Self {
        if v == f64::NEG_INFINITY {
            Extended::MinusInf
        } else {
            Extended::Finite(v)
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }
}

/// Function sampled on a grid, possibly minus infinity at some points but
/// finite at at least one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    grid: Grid,
    values: Vec<Extended>,
}

impl GridFunction {
    /// Validates lengths and value sanity: no NaN, no plus infinity, at
    /// least one finite entry.
    pub fn new(grid: Grid, values: Vec<Extended>) -> Result<Self> {
        if values.len() != grid.count() {
            return Err(Error::LengthMismatch { got: values.len(), want: grid.count() });
        }
        let mut any_finite = false;
        for (i, v) in values.iter().enumerate() {
            match v {
                Extended::Finite(x) if x.is_finite() => any_finite = true,
                Extended::Finite(_) => return Err(Error::NonFiniteValue(i)),
                Extended::MinusInf => {}
            }
        }
        if !any_finite {
            return Err(Error::NoFiniteValue);
        }
        Ok(Self { grid, values })
    }

    /// Wraps an all-finite vector.
    pub fn from_finite(grid: Grid, values: Vec<f64>) -> Result<Self> {
        Self::new(grid, values.into_iter().map(Extended::Finite).collect())
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Extended] {
        &self.values
    }

    /// Value at point `i`.
    pub fn eval(&self, i: usize) -> Result<Extended> {
        if i >= self.values.len() {
            return Err(Error::IndexOutOfRange { index: i, count: self.values.len() });
        }
        Ok(self.values[i])
    }

    /// Adds `c` to every finite value, leaving minus infinity fixed.
    pub fn shift_values(&self, c: f64) -> Result<Self> {
        if !c.is_finite() {
            return Err(Error::NonFiniteValue(0));
        }
        let values = self
            .values
            .iter()
            .map(|v| match v {
                Extended::MinusInf => Extended::MinusInf,
                Extended::Finite(x) => Extended::Finite(x + c),
            })
            .collect();
        Ok(Self { grid: self.grid, values })
    }

    /// Raw float view for max-plus kernels.
    pub fn as_f64_vec(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.as_f64()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_degenerate_grids() {
        assert_eq!(make_grid(0.0, 0.0, 4).unwrap_err(), Error::NonPositiveStep(0.0));
        assert_eq!(make_grid(0.0, -1.0, 4).unwrap_err(), Error::NonPositiveStep(-1.0));
        assert_eq!(make_grid(0.0, 1.0, 1).unwrap_err(), Error::CountTooSmall(1));
        assert!(make_grid(f64::NAN, 1.0, 4).is_err());
    }

    #[test]
    fn points_are_affine_in_index() {
        let g = make_grid(-2.0, 0.25, 17).unwrap();
        assert_eq!(g.point(0).unwrap(), -2.0);
        assert_eq!(g.point(16).unwrap(), -2.0 + 16.0 * 0.25);
        assert!(g.point(17).is_err());
        let pts = g.points();
        assert_eq!(pts.len(), 17);
        assert_eq!(pts[8], 0.0);
    }

    #[test]
    fn index_of_rejects_off_grid_points() {
        let g = make_grid(0.0, 0.5, 5).unwrap();
        assert_eq!(g.index_of(1.5).unwrap(), 3);
        assert_eq!(g.index_of(1.5 + 1e-12).unwrap(), 3);
        assert_eq!(g.index_of(1.3).unwrap_err(), Error::PointNotOnGrid(1.3));
        assert!(g.index_of(9.0).is_err());
    }

    #[test]
    fn window_indices_include_edge_points() {
        let g = make_grid(-1.0, 0.5, 5).unwrap();
        assert_eq!(g.window_indices(-0.5, 0.5).unwrap(), (1, 3));
        assert_eq!(g.window_indices(-0.4, 0.4).unwrap(), (2, 2));
        assert!(g.window_indices(1.2, 1.4).is_err());
        assert!(g.window_indices(0.5, -0.5).is_err());
    }

    #[test]
    fn grid_function_validation() {
        let g = make_grid(0.0, 1.0, 3).unwrap();
        assert!(GridFunction::from_finite(g, vec![1.0, 2.0, 3.0]).is_ok());
        assert!(GridFunction::from_finite(g, vec![1.0, 2.0]).is_err());
        assert!(GridFunction::from_finite(g, vec![1.0, f64::NAN, 3.0]).is_err());
        assert!(GridFunction::new(g, vec![Extended::MinusInf; 3]).is_err());
        let f = GridFunction::new(
            g,
            vec![Extended::MinusInf, Extended::Finite(2.0), Extended::MinusInf],
        )
        .unwrap();
        assert_eq!(f.eval(0).unwrap(), Extended::MinusInf);
        assert_eq!(f.eval(1).unwrap(), Extended::Finite(2.0));
        assert!(f.eval(3).is_err());
    }

    #[test]
    fn shift_moves_finite_values_only() {
        let g = make_grid(0.0, 1.0, 3).unwrap();
        let f = GridFunction::new(
            g,
            vec![Extended::MinusInf, Extended::Finite(2.0), Extended::Finite(-1.0)],
        )
        .unwrap();
        let s = f.shift_values(1.5).unwrap();
        assert_eq!(s.eval(0).unwrap(), Extended::MinusInf);
        assert_eq!(s.eval(1).unwrap(), Extended::Finite(3.5));
        assert_eq!(s.eval(2).unwrap(), Extended::Finite(0.5));
        assert!(f.shift_values(f64::INFINITY).is_err());
    }

    #[test]
    fn raw_view_uses_absorbing_neg_infinity() {
        let g = make_grid(0.0, 1.0, 2).unwrap();
        let f = GridFunction::new(g, vec![Extended::MinusInf, Extended::Finite(1.0)]).unwrap();
        let raw = f.as_f64_vec();
        assert_eq!(raw[0], f64::NEG_INFINITY);
        assert_eq!(raw[0].max(raw[1]), 1.0);
        assert_eq!(raw[0] + 5.0, f64::NEG_INFINITY);
    }
}
