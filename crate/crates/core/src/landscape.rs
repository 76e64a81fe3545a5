//! Rescaling last passage values into directed landscape slices.
//!
//! A slice is the matrix of rescaled last passage values between a window of
//! starts `z` at time `s` and a window of ends `x` at time `t`, all drawn
//! from ONE line ensemble so that entries are coupled and pathwise
//! comparisons downstream are meaningful.
//!
//! The embedding sends a landscape point `(x, s)` to spatial coordinate
//! `s + 2x / n^(1/3)` on line `-floor(s * n)`. Both requested windows embed
//! into one ensemble grid whose step is the finer of the two embedded window
//! steps. The start window anchors the grid (its origin is an ensemble point
//! by construction); the end window generally falls between points because
//! the time offset `t - s` is not a step multiple, so its origin snaps to
//! the nearest point, at most half a step away. Slices therefore carry
//! *realized* coordinate grids, read back from the ensemble indices; callers
//! must use those, not the requested windows, when mapping coordinates to
//! columns.

use serde::{Deserialize, Serialize};

use crate::ensemble::{sample_line_ensemble, LineEnsemble};
use crate::error::{Error, Result};
use crate::grid::{make_grid, Grid};
use crate::lpp::{last_passage_profile, LppEndpoint};
use crate::rng::RngKey;

/// The approximation parameter `n` and the maps it induces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingParams {
    n: f64,
}

impl ScalingParams {
    pub fn new(n: f64) -> Result<Self> {
        if !(n >= 1.0) || !n.is_finite() {
            return Err(Error::BadScalingN(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> f64 {
        self.n
    }

    /// Embedded spatial coordinate of landscape position `x` at time `s`.
    pub fn space_map(&self, x: f64, s: f64) -> f64 {
        s + 2.0 * x / self.n.cbrt()
    }

    /// Landscape position whose embedding at time `s` is `u`.
    pub fn space_unmap(&self, u: f64, s: f64) -> f64 {
        (u - s) * self.n.cbrt() / 2.0
    }

    /// Ensemble line label carrying time `s`; later times sit on higher
    /// (smaller-numbered) lines.
    pub fn line_label(&self, s: f64) -> i64 {
        -((s * self.n).floor() as i64)
    }

    /// Number of ensemble lines spanned by the time interval `[s, t]`,
    /// boundary lines included.
    pub fn lines_between(&self, s: f64, t: f64) -> Result<usize> {
        if !(s < t) {
            return Err(Error::BadTimeOrder { s, t });
        }
        let k = self.line_label(s) - self.line_label(t) + 1;
        Ok(k as usize)
    }
}

/// The inverse of the prelimit coupling map: centers and scales a raw last
/// passage value between `(x, s)` and `(y, t)` into landscape units,
/// `n^(1/6) * (raw - 2(t-s)*sqrt(n) - 2(y-x)*n^(1/6))`. Minus infinity
/// passes through unchanged.
pub fn rescale_to_landscape(raw: f64, n: f64, x: f64, s: f64, y: f64, t: f64) -> Result<f64> {
    if !(s < t) {
        return Err(Error::BadTimeOrder { s, t });
    }
    if !(n >= 1.0) || !n.is_finite() {
        return Err(Error::BadScalingN(n));
    }
    let sixth = n.cbrt().sqrt();
    Ok(sixth * (raw - 2.0 * (t - s) * n.sqrt() - 2.0 * (y - x) * sixth))
}

/// Where a slice's numbers came from: the sampled ensemble and the index
/// maps from slice rows and columns into it. Kept for recomputation
/// cross-checks; absent on fixture slices.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceProvenance {
    pub ensemble: LineEnsemble,
    /// Ensemble line carrying the start time (bottom of the used block).
    pub start_line: usize,
    /// Ensemble line carrying the end time.
    pub end_line: usize,
    /// Ensemble grid index of each z row.
    pub z_indices: Vec<usize>,
    /// Ensemble grid index of each x column.
    pub x_indices: Vec<usize>,
}

/// Matrix of landscape values `L[z][x]` between realized coordinate grids at
/// two fixed times, sampled from one ensemble. Entries are minus infinity
/// where the embedded start lies right of the embedded end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeSlice {
    s: f64,
    t: f64,
    z_grid: Grid,
    x_grid: Grid,
    values: Vec<Vec<f64>>,
    params: ScalingParams,
    seed_record: RngKey,
    coupling_id: u64,
    #[serde(skip)]
    provenance: Option<SliceProvenance>,
}

impl LandscapeSlice {
    /// Wraps an explicit value matrix, for fixtures. `coupling_id` ties
    /// fixture slices that should count as drawn from one sample.
    pub fn from_values(
        s: f64,
        t: f64,
        z_grid: Grid,
        x_grid: Grid,
        values: Vec<Vec<f64>>,
        params: ScalingParams,
        coupling_id: u64,
    ) -> Result<Self> {
        if !(s < t) {
            return Err(Error::BadTimeOrder { s, t });
        }
        if values.len() != z_grid.count() {
            return Err(Error::LengthMismatch { got: values.len(), want: z_grid.count() });
        }
        for row in &values {
            if row.len() != x_grid.count() {
                return Err(Error::LengthMismatch { got: row.len(), want: x_grid.count() });
            }
            if let Some(i) = row.iter().position(|v| v.is_nan() || *v == f64::INFINITY) {
                return Err(Error::NonFiniteValue(i));
            }
        }
        Ok(Self {
            s,
            t,
            z_grid,
            x_grid,
            values,
            params,
            seed_record: RngKey::new(0),
            coupling_id,
            provenance: None,
        })
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn z_grid(&self) -> &Grid {
        &self.z_grid
    }

    pub fn x_grid(&self) -> &Grid {
        &self.x_grid
    }

    /// Value matrix indexed `[z][x]`; minus infinity marks inadmissible
    /// pairs.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn value(&self, z_index: usize, x_index: usize) -> Result<f64> {
        let row = self
            .values
            .get(z_index)
            .ok_or(Error::IndexOutOfRange { index: z_index, count: self.values.len() })?;
        row.get(x_index)
            .copied()
            .ok_or(Error::IndexOutOfRange { index: x_index, count: row.len() })
    }

    pub fn params(&self) -> ScalingParams {
        self.params
    }

    pub fn seed_record(&self) -> RngKey {
        self.seed_record
    }

    /// Identifies the underlying sample; slices with equal ids were built
    /// from one ensemble and may be combined pathwise.
    pub fn coupling_id(&self) -> u64 {
        self.coupling_id
    }

    pub fn provenance(&self) -> Option<&SliceProvenance> {
        self.provenance.as_ref()
    }
}

fn mix_id(parts: &[u64]) -> u64 {
    let mut state = 0x51a0_9e5d_2c1b_7f43u64;
    let mut out = 0;
    for &p in parts {
        state ^= p;
        state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        out = (z ^ (z >> 31)).rotate_left(11) ^ out;
    }
    out
}

/// Rounds a step ratio to the integer it must be; errors if the two steps
/// are not commensurate.
fn step_multiple(step: f64, base: f64) -> Result<usize> {
    let ratio = step / base;
    let m = ratio.round();
    if m < 1.0 || (ratio - m).abs() > 1e-9 * m {
        return Err(Error::IncommensurateSteps(step, base));
    }
    Ok(m as usize)
}

/// Fills a slice from an already sampled ensemble given explicit index maps.
/// One profile sweep per z row covers every x column.
#[allow(clippy::too_many_arguments)]
fn slice_from_ensemble(
    ensemble: &LineEnsemble,
    params: ScalingParams,
    s: f64,
    t: f64,
    start_line: usize,
    end_line: usize,
    z_indices: Vec<usize>,
    x_indices: Vec<usize>,
    z_grid: Grid,
    x_grid: Grid,
    seed_record: RngKey,
    coupling_id: u64,
) -> Result<LandscapeSlice> {
    let n = params.n();
    let mut values = Vec::with_capacity(z_indices.len());
    for (zi, &z_idx) in z_indices.iter().enumerate() {
        let z = z_grid.point(zi)?;
        let start = LppEndpoint { space_index: z_idx, line: start_line };
        let profile = last_passage_profile(ensemble, start, end_line)?;
        let mut row = Vec::with_capacity(x_indices.len());
        for (xi, &x_idx) in x_indices.iter().enumerate() {
            let x = x_grid.point(xi)?;
            let raw = if x_idx >= z_idx { profile[x_idx] } else { f64::NEG_INFINITY };
            row.push(rescale_to_landscape(raw, n, z, s, x, t)?);
        }
        values.push(row);
    }
    Ok(LandscapeSlice {
        s,
        t,
        z_grid,
        x_grid,
        values,
        params,
        seed_record,
        coupling_id,
        provenance: Some(SliceProvenance {
            ensemble: ensemble.clone(),
            start_line,
            end_line,
            z_indices,
            x_indices,
        }),
    })
}

/// Everything needed to place two coordinate windows on one ensemble grid.
struct Embedding {
    ens_grid: Grid,
    z_indices: Vec<usize>,
    x_indices: Vec<usize>,
    z_grid: Grid,
    x_grid: Grid,
}

/// Embeds the z window at time `s` and the x window at time `t` into one
/// ensemble grid. The z window anchors the grid, so its realized grid is the
/// requested one verbatim; the x window snaps to the nearest point and its
/// realized origin is read back from the ensemble, an exact description of
/// where the matrix entries actually sit.
fn embed_windows(
    params: ScalingParams,
    s: f64,
    t: f64,
    z_req: &Grid,
    x_req: &Grid,
) -> Result<Embedding> {
    let base = z_req.step().min(x_req.step());
    let mz = step_multiple(z_req.step(), base)?;
    let mx = step_multiple(x_req.step(), base)?;
    let cbrt = params.n().cbrt();
    let h = 2.0 * base / cbrt;

    let z0_emb = params.space_map(z_req.origin(), s);
    let z1_emb = params.space_map(z_req.max_point(), s);
    let x0_emb = params.space_map(x_req.origin(), t);
    let x1_emb = params.space_map(x_req.max_point(), t);
    let lo = z0_emb.min(x0_emb) - h;
    let hi = z1_emb.max(x1_emb) + h;

    // anchor: the grid origin is the z window origin shifted left by whole
    // steps, so the z window lands on points up to one rounding error
    let shift = ((z0_emb - lo) / h).ceil() as usize;
    let origin = z0_emb - shift as f64 * h;
    let count = ((hi - origin) / h).ceil() as usize + 2;
    let ens_grid = make_grid(origin, h, count)?;

    let z_indices: Vec<usize> = (0..z_req.count()).map(|j| shift + j * mz).collect();
    let x_snap = ((x0_emb - origin) / h).round() as usize;
    let x_indices: Vec<usize> = (0..x_req.count()).map(|i| x_snap + i * mx).collect();
    let last_needed = *z_indices.last().expect("count >= 2").max(
        x_indices.last().expect("count >= 2"),
    );
    if last_needed >= count {
        return Err(Error::IndexOutOfRange { index: last_needed, count });
    }
    if z_indices[0] > *x_indices.last().expect("count >= 2") {
        return Err(Error::WindowTooSmall(
            "every embedded start lies right of every embedded end".into(),
        ));
    }

    // The anchor puts every z point on the ensemble up to rounding, so the
    // requested grid already describes the realized points; reading the
    // origin back through the embedding round trip can land a few ulps off,
    // and grid equality downstream is exact.
    let z_grid = *z_req;
    let x_grid = make_grid(
        params.space_unmap(ens_grid.point(x_indices[0])?, t),
        x_req.step(),
        x_req.count(),
    )?;
    Ok(Embedding { ens_grid, z_indices, x_indices, z_grid, x_grid })
}

/// Samples one ensemble and fills the slice between `z_grid` at time `s`
/// and `x_grid` at time `t`. Same key, same slice, bit for bit.
pub fn sample_landscape_slice(
    params: ScalingParams,
    s: f64,
    t: f64,
    z_grid: &Grid,
    x_grid: &Grid,
    key: RngKey,
) -> Result<LandscapeSlice> {
    let k = params.lines_between(s, t)?;
    let emb = embed_windows(params, s, t, z_grid, x_grid)?;
    let ensemble = sample_line_ensemble(emb.ens_grid, k, key)?;
    let coupling_id = mix_id(&[
        key.master_seed,
        key.stream,
        key.substream,
        params.n().to_bits(),
        s.to_bits(),
        t.to_bits(),
    ]);
    slice_from_ensemble(
        &ensemble,
        params,
        s,
        t,
        k,
        1,
        emb.z_indices,
        emb.x_indices,
        emb.z_grid,
        emb.x_grid,
        key,
        coupling_id,
    )
}

/// Sample of the parabolically tilted sheet at times `(0, 1)`:
/// `sheet[z][x] = L[z][x] + (z - x)^2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AirySheetSample {
    pub slice: LandscapeSlice,
    pub sheet: Vec<Vec<f64>>,
}

/// Adds the parabola back onto a unit-time slice.
pub fn airy_sheet(slice: &LandscapeSlice) -> Result<AirySheetSample> {
    if slice.s() != 0.0 || slice.t() != 1.0 {
        return Err(Error::WrongTimes {
            s: slice.s(),
            t: slice.t(),
            want_s: 0.0,
            want_t: 1.0,
        });
    }
    let mut sheet = Vec::with_capacity(slice.z_grid().count());
    for zi in 0..slice.z_grid().count() {
        let z = slice.z_grid().point(zi)?;
        let mut row = Vec::with_capacity(slice.x_grid().count());
        for xi in 0..slice.x_grid().count() {
            let x = slice.x_grid().point(xi)?;
            row.push(slice.value(zi, xi)? + (z - x) * (z - x));
        }
        sheet.push(row);
    }
    Ok(AirySheetSample { slice: slice.clone(), sheet })
}

/// Samples one slice per time interval, each from its own key derived by
/// interval index. Disjoint intervals draw disjoint line ranges from
/// independent streams, so the slices are independent by construction.
/// Interval interiors must not overlap; touching endpoints are fine.
pub fn disjoint_time_slices(
    params: ScalingParams,
    intervals: &[(f64, f64)],
    z_grid: &Grid,
    x_grid: &Grid,
    key: RngKey,
) -> Result<Vec<LandscapeSlice>> {
    for &(a, b) in intervals {
        if !(a < b) {
            return Err(Error::BadTimeOrder { s: a, t: b });
        }
    }
    for (i, &(a0, a1)) in intervals.iter().enumerate() {
        for &(b0, b1) in &intervals[i + 1..] {
            if a0 < b1 && b0 < a1 {
                return Err(Error::OverlappingIntervals { a0, a1, b0, b1 });
            }
        }
    }
    intervals
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| sample_landscape_slice(params, a, b, z_grid, x_grid, key.child(i as u64)))
        .collect()
}

/// Three slices cut from ONE ensemble across a line-aligned middle time:
/// `full` spans `(r, t)`, `first` spans `(r, s)` into the full-resolution
/// middle grid, `second` continues `(s, t)` out of it. Shared
/// `coupling_id`; composition across the middle is exact up to rounding.
#[derive(Debug, Clone, PartialEq)]
pub struct CoupledSplit {
    pub first: LandscapeSlice,
    pub second: LandscapeSlice,
    pub full: LandscapeSlice,
}

/// Builds a [`CoupledSplit`] over `r < s < t`. The middle time must land on
/// a line boundary (`s * n` integral); the middle grid is the whole ensemble
/// grid read back at time `s`, so no crossing position is lost.
pub fn coupled_time_split(
    params: ScalingParams,
    r: f64,
    s: f64,
    t: f64,
    z_grid: &Grid,
    x_grid: &Grid,
    key: RngKey,
) -> Result<CoupledSplit> {
    if !(r < s) {
        return Err(Error::BadTimeOrder { s: r, t: s });
    }
    if !(s < t) {
        return Err(Error::BadTimeOrder { s, t });
    }
    let sn = s * params.n();
    if (sn - sn.round()).abs() > 1e-9 {
        return Err(Error::MisalignedSplit { s, n: params.n() });
    }
    let k_full = params.lines_between(r, t)?;
    let line_s = (params.line_label(s) - params.line_label(t) + 1) as usize;
    let emb = embed_windows(params, r, t, z_grid, x_grid)?;
    let ensemble = sample_line_ensemble(emb.ens_grid, k_full, key)?;
    let coupling_id = mix_id(&[
        key.master_seed,
        key.stream,
        key.substream,
        params.n().to_bits(),
        r.to_bits(),
        s.to_bits(),
        t.to_bits(),
    ]);

    let ens_count = emb.ens_grid.count();
    let mid_indices: Vec<usize> = (0..ens_count).collect();
    let cbrt = params.n().cbrt();
    let mid_grid = make_grid(
        params.space_unmap(emb.ens_grid.point(0)?, s),
        emb.ens_grid.step() * cbrt * 0.5,
        ens_count,
    )?;

    let full = slice_from_ensemble(
        &ensemble,
        params,
        r,
        t,
        k_full,
        1,
        emb.z_indices.clone(),
        emb.x_indices.clone(),
        emb.z_grid,
        emb.x_grid,
        key,
        coupling_id,
    )?;
    let first = slice_from_ensemble(
        &ensemble,
        params,
        r,
        s,
        k_full,
        line_s,
        emb.z_indices,
        mid_indices.clone(),
        full.z_grid,
        mid_grid,
        key,
        coupling_id,
    )?;
    let second = slice_from_ensemble(
        &ensemble,
        params,
        s,
        t,
        line_s,
        1,
        mid_indices,
        full.provenance.as_ref().expect("sampled slice").x_indices.clone(),
        mid_grid,
        full.x_grid,
        key,
        coupling_id,
    )?;
    Ok(CoupledSplit { first, second, full })
}

impl CoupledSplit {
    /// Largest absolute difference between the full slice and the best
    /// two-leg composition through the middle. `mid_points` restricts the
    /// crossing positions (snapped to the middle grid); `None` scans every
    /// middle column, in which case the difference is pure rounding noise.
    pub fn composition_gap(&self, mid_points: Option<&[f64]>) -> Result<f64> {
        let mid_count = self.first.x_grid().count();
        let mids: Vec<usize> = match mid_points {
            None => (0..mid_count).collect(),
            Some(points) => points
                .iter()
                .map(|&p| self.first.x_grid().nearest_index(p))
                .collect(),
        };
        if mids.is_empty() {
            return Err(Error::WindowTooSmall("no middle crossing positions".into()));
        }
        let mut gap: f64 = 0.0;
        for zi in 0..self.full.z_grid().count() {
            for xi in 0..self.full.x_grid().count() {
                let direct = self.full.value(zi, xi)?;
                let mut composed = f64::NEG_INFINITY;
                for &m in &mids {
                    let leg = self.first.value(zi, m)? + self.second.value(m, xi)?;
                    if leg > composed {
                        composed = leg;
                    }
                }
                if direct == f64::NEG_INFINITY && composed == f64::NEG_INFINITY {
                    continue;
                }
                gap = gap.max((direct - composed).abs());
            }
        }
        Ok(gap)
    }
}

/// Max absolute composition gap across a line-aligned middle time; the
/// headline exactness check. With the full middle grid the gap is rounding
/// noise; restricting `mid_points` can only lower the composed value, so
/// the gap stays nonnegative and grows.
#[allow(clippy::too_many_arguments)]
pub fn composition_across_times(
    params: ScalingParams,
    r: f64,
    s: f64,
    t: f64,
    z_grid: &Grid,
    x_grid: &Grid,
    mid_points: Option<&[f64]>,
    key: RngKey,
) -> Result<f64> {
    coupled_time_split(params, r, s, t, z_grid, x_grid, key)?.composition_gap(mid_points)
}
