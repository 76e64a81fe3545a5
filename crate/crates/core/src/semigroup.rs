//! The max-plus growth semigroup over landscape slices.
//!
//! An initial profile `h` on the slice's start grid grows to
//! `h_t(x) = max_z (h(z) + L[z][x])`, with minus infinity absorbing. The
//! evolved profile carries the rightmost maximizing `z` per column, and the
//! two exact facts the laboratory leans on everywhere are (a) the stored
//! value equals `h(Z) + L[Z][x]` bit for bit, and (b) the argmax is
//! nondecreasing in `x` on every sample.
//!
//! All comparison checks here are pathwise: the profiles being compared must
//! be evolved through the SAME slice (one ensemble sample), which is what
//! [`LandscapeSlice::coupling_id`] certifies.

use serde::{Deserialize, Serialize};

use crate::ensemble::{drifted_pair, sample_two_sided_bm};
use crate::error::{Error, Result};
use crate::grid::{Extended, Grid, GridFunction};
use crate::landscape::LandscapeSlice;
use crate::rng::RngKey;

/// Recipe for an initial profile on a start grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum InitialKind {
    /// Zero at the grid point nearest the apex, minus infinity elsewhere.
    NarrowWedge { apex: f64 },
    /// Zero everywhere.
    Flat,
    /// Two-sided Brownian motion with the given drift and diffusion, pinned
    /// at the origin, sampled from the key.
    Brownian { drift: f64, diffusion: f64, key: RngKey },
    /// `|x|^exponent` with exponent in [0, 1]; exponent 0 is the constant 1
    /// (0^0 := 1).
    Power { exponent: f64 },
    /// Any grid function the caller supplies.
    Custom(GridFunction),
}

/// An initial profile: the recipe plus its realization on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialCondition {
    kind: InitialKind,
    realized: GridFunction,
}

impl InitialCondition {
    pub fn kind(&self) -> &InitialKind {
        &self.kind
    }

    pub fn realized(&self) -> &GridFunction {
        &self.realized
    }

    pub fn grid(&self) -> &Grid {
        self.realized.grid()
    }
}

/// Realizes a profile recipe on a grid.
pub fn make_initial(kind: InitialKind, grid: &Grid) -> Result<InitialCondition> {
    let realized = match &kind {
        InitialKind::NarrowWedge { apex } => {
            let half_span = grid.step() * 0.5;
            if *apex < grid.origin() - half_span || *apex > grid.max_point() + half_span {
                return Err(Error::ApexOffGrid(*apex));
            }
            let i = grid.nearest_index(*apex);
            let mut values = vec![Extended::MinusInf; grid.count()];
            values[i] = Extended::Finite(0.0);
            GridFunction::new(*grid, values)?
        }
        InitialKind::Flat => GridFunction::from_finite(*grid, vec![0.0; grid.count()])?,
        InitialKind::Brownian { drift, diffusion, key } => {
            let path = sample_two_sided_bm(*grid, *drift, *diffusion, *key)?;
            GridFunction::from_finite(*grid, path)?
        }
        InitialKind::Power { exponent } => {
            if !(0.0..=1.0).contains(exponent) {
                return Err(Error::BadExponent(*exponent));
            }
            let values = grid
                .points()
                .into_iter()
                .map(|x| if *exponent == 0.0 { 1.0 } else { x.abs().powf(*exponent) })
                .collect();
            GridFunction::from_finite(*grid, values)?
        }
        InitialKind::Custom(f) => {
            if f.grid() != grid {
                return Err(Error::GridMismatch);
            }
            f.clone()
        }
    };
    Ok(InitialCondition { kind, realized })
}

/// A profile after growth through a slice: values and rightmost argmax per
/// end-grid column, plus enough provenance to compare profiles pathwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolvedProfile {
    h_t: GridFunction,
    argmax: Vec<usize>,
    z_grid: Grid,
    s: f64,
    t: f64,
    coupling_id: u64,
}

impl EvolvedProfile {
    /// Grown profile on the slice's end grid; always all finite.
    pub fn h_t(&self) -> &GridFunction {
        &self.h_t
    }

    pub fn x_grid(&self) -> &Grid {
        self.h_t.grid()
    }

    /// Rightmost maximizing start index per end column.
    pub fn argmax(&self) -> &[usize] {
        &self.argmax
    }

    /// Start coordinate of the maximizer for column `x_index`.
    pub fn argmax_coordinate(&self, x_index: usize) -> Result<f64> {
        let zi = *self
            .argmax
            .get(x_index)
            .ok_or(Error::IndexOutOfRange { index: x_index, count: self.argmax.len() })?;
        self.z_grid.point(zi)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn coupling_id(&self) -> u64 {
        self.coupling_id
    }

    /// Value at column `i` as a plain float.
    pub fn value(&self, i: usize) -> Result<f64> {
        Ok(self.h_t.eval(i)?.as_f64())
    }
}

/// One column of the max-plus product: best value and rightmost maximizer,
/// or none if every candidate is minus infinity.
fn column_max(h: &[f64], values: &[Vec<f64>], xi: usize) -> Option<(f64, usize)> {
    let mut best = f64::NEG_INFINITY;
    let mut arg = None;
    for (zi, row) in values.iter().enumerate() {
        let c = h[zi] + row[xi];
        if c == f64::NEG_INFINITY {
            continue;
        }
        // >= keeps the rightmost among exact ties
        if arg.is_none() || c >= best {
            best = c;
            arg = Some(zi);
        }
    }
    arg.map(|zi| (best, zi))
}

/// Grows `h` through `slice`. Every end column must see at least one finite
/// candidate `h(z) + L[z][x]`.
pub fn evolve(h: &InitialCondition, slice: &LandscapeSlice) -> Result<EvolvedProfile> {
    if h.grid() != slice.z_grid() {
        return Err(Error::GridMismatch);
    }
    let hv = h.realized().as_f64_vec();
    let count = slice.x_grid().count();
    let mut out = Vec::with_capacity(count);
    let mut argmax = Vec::with_capacity(count);
    for xi in 0..count {
        let (best, zi) = column_max(&hv, slice.values(), xi)
            .ok_or(Error::AllMinusInfinityColumn { x_index: xi })?;
        out.push(best);
        argmax.push(zi);
    }
    Ok(EvolvedProfile {
        h_t: GridFunction::from_finite(*slice.x_grid(), out)?,
        argmax,
        z_grid: *slice.z_grid(),
        s: slice.s(),
        t: slice.t(),
        coupling_id: slice.coupling_id(),
    })
}

/// Max-plus product that carries minus-infinity columns through instead of
/// erroring; internal to the two-step composition, whose intermediate
/// profile legitimately dies left of the support of `h`.
fn max_plus(h: &[f64], values: &[Vec<f64>], columns: usize) -> Vec<f64> {
    (0..columns)
        .map(|xi| {
            let mut best = f64::NEG_INFINITY;
            for (zi, row) in values.iter().enumerate() {
                let c = h[zi] + row[xi];
                if c > best {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Largest deviation between growing `h` in two coupled steps and growing
/// it directly: `max_x |(h -> first -> second)(x) - (h -> full)(x)|`.
/// All three slices must come from one ensemble; the residual is rounding
/// noise because the underlying sweep decomposes at the shared line.
pub fn semigroup_gap(
    h: &InitialCondition,
    first: &LandscapeSlice,
    second: &LandscapeSlice,
    full: &LandscapeSlice,
) -> Result<f64> {
    if first.coupling_id() != full.coupling_id() || second.coupling_id() != full.coupling_id() {
        return Err(Error::MismatchedEnsembles);
    }
    if first.x_grid() != second.z_grid()
        || first.z_grid() != full.z_grid()
        || second.x_grid() != full.x_grid()
    {
        return Err(Error::GridMismatch);
    }
    if first.s() != full.s() || first.t() != second.s() || second.t() != full.t() {
        return Err(Error::BadTimeOrder { s: first.t(), t: second.s() });
    }
    if h.grid() != first.z_grid() {
        return Err(Error::GridMismatch);
    }
    let hv = h.realized().as_f64_vec();
    let mid = max_plus(&hv, first.values(), first.x_grid().count());
    let two_step = max_plus(&mid, second.values(), second.x_grid().count());
    let direct = max_plus(&hv, full.values(), full.x_grid().count());
    let mut gap: f64 = 0.0;
    for (a, b) in two_step.iter().zip(&direct) {
        if *a == f64::NEG_INFINITY && *b == f64::NEG_INFINITY {
            continue;
        }
        gap = gap.max((a - b).abs());
    }
    Ok(gap)
}

/// Outcome of the pairwise increment comparison at two columns.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonVerdict {
    /// The argmax ordering hypothesis held on this sample.
    pub hypothesis_held: bool,
    /// The increment inequality held (always reported; only guaranteed when
    /// the hypothesis holds).
    pub inequality_held: bool,
    /// Signed excess `(h_t(y;h) - h_t(x;h)) - (h_t(y;g) - h_t(x;g))`;
    /// nonpositive up to rounding when the hypothesis holds.
    pub excess: f64,
}

/// Compares increments of two profiles grown through one slice at columns
/// `x_index < y_index`: whenever the rightmost argmax of `h` at `y` sits
/// weakly left of the rightmost argmax of `g` at `x`, the increment of `h`
/// cannot exceed the increment of `g`.
pub fn argmax_comparison_check(
    h: &InitialCondition,
    g: &InitialCondition,
    slice: &LandscapeSlice,
    x_index: usize,
    y_index: usize,
) -> Result<ComparisonVerdict> {
    if x_index >= y_index {
        return Err(Error::BadEndpointOrder);
    }
    let eh = evolve(h, slice)?;
    let eg = evolve(g, slice)?;
    let hypothesis_held = eh.argmax()[y_index] <= eg.argmax()[x_index];
    let excess = (eh.value(y_index)? - eh.value(x_index)?)
        - (eg.value(y_index)? - eg.value(x_index)?);
    Ok(ComparisonVerdict { hypothesis_held, inequality_held: excess <= 1e-9, excess })
}

/// Checks the increment-ordering hypothesis `h(y) - h(x) <= g(y) - g(x)`
/// for all start pairs `x < y`, then asserts the same ordering for the
/// grown profiles on all end pairs. Returns the largest signed excess on
/// the grown side; at most rounding when the inputs qualify.
pub fn attractiveness_check(
    h: &InitialCondition,
    g: &InitialCondition,
    slice: &LandscapeSlice,
) -> Result<f64> {
    if h.grid() != slice.z_grid() || g.grid() != slice.z_grid() {
        return Err(Error::GridMismatch);
    }
    let hv = h.realized().as_f64_vec();
    let gv = g.realized().as_f64_vec();
    let zc = slice.z_grid().count();
    for x in 0..zc {
        for y in x + 1..zc {
            if !hv[x].is_finite() || !hv[y].is_finite() || !gv[x].is_finite() || !gv[y].is_finite()
            {
                return Err(Error::HypothesisFailed { x, y });
            }
            if hv[y] - hv[x] > gv[y] - gv[x] + 1e-12 {
                return Err(Error::HypothesisFailed { x, y });
            }
        }
    }
    let eh = evolve(h, slice)?;
    let eg = evolve(g, slice)?;
    let xc = slice.x_grid().count();
    let mut max_excess = f64::NEG_INFINITY;
    for x in 0..xc {
        for y in x + 1..xc {
            let excess =
                (eh.value(y)? - eh.value(x)?) - (eg.value(y)? - eg.value(x)?);
            max_excess = max_excess.max(excess);
        }
    }
    Ok(max_excess)
}

/// What one sandwich trial produced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichOutcome {
    /// The argmax crossing event held on this sample.
    pub event_held: bool,
    /// The coupling functional `g(a) - g(-a)` for
    /// `g = h_t^{+mu} - h_t^{-mu}`; nonnegative pathwise, mean `4*mu*a`.
    pub i_t: f64,
    /// When the event held: largest violation of the two-sided increment
    /// sandwich over column pairs in `[-a, a]`; rounding-level when the
    /// construction is sound.
    pub max_sandwich_violation: Option<f64>,
}

/// Runs one sandwich trial: grows `h` and the two tilted copies
/// `b(z) -+ mu*z` of one Brownian path through one slice, tests the argmax
/// crossing event at `+-a`, and measures the increment functional `I_t`.
pub fn sandwich_event(
    h: &InitialCondition,
    b: &GridFunction,
    mu: f64,
    a: f64,
    slice: &LandscapeSlice,
) -> Result<SandwichOutcome> {
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::BadDrift(mu));
    }
    if b.grid() != slice.z_grid() {
        return Err(Error::GridMismatch);
    }
    if !(a > 0.0) {
        return Err(Error::WindowTooSmall(format!("need a > 0, got {a}")));
    }
    let xg = slice.x_grid();
    let slack = xg.step() * 0.5;
    if xg.origin() > -a + slack || xg.max_point() < a - slack {
        return Err(Error::WindowTooSmall(format!(
            "end window [{}, {}] does not cover [-{a}, {a}]",
            xg.origin(),
            xg.max_point()
        )));
    }
    let i_neg = xg.nearest_index(-a);
    let i_zero = xg.nearest_index(0.0);
    let i_pos = xg.nearest_index(a);
    if i_neg >= i_zero || i_zero >= i_pos {
        return Err(Error::WindowTooSmall(format!(
            "end grid too coarse to separate -{a}, 0, {a}"
        )));
    }

    let bv = b.as_f64_vec();
    let (b_minus, b_plus) = drifted_pair(slice.z_grid(), &bv, mu)?;
    let minus = make_initial(
        InitialKind::Custom(GridFunction::from_finite(*slice.z_grid(), b_minus)?),
        slice.z_grid(),
    )?;
    let plus = make_initial(
        InitialKind::Custom(GridFunction::from_finite(*slice.z_grid(), b_plus)?),
        slice.z_grid(),
    )?;
    let eh = evolve(h, slice)?;
    let em = evolve(&minus, slice)?;
    let ep = evolve(&plus, slice)?;

    let event_held =
        eh.argmax()[i_pos] <= ep.argmax()[i_neg] && eh.argmax()[i_neg] >= em.argmax()[i_pos];

    // I_t telescopes to g(a) - g(-a) for g = h_t^{+mu} - h_t^{-mu}
    let delta = |e: &EvolvedProfile, i: usize| -> Result<f64> {
        Ok(e.value(i)? - e.value(i_zero)?)
    };
    let i_t = delta(&ep, i_pos)? - delta(&em, i_pos)? + delta(&em, i_neg)? - delta(&ep, i_neg)?;

    let max_sandwich_violation = if event_held {
        let mut worst: f64 = 0.0;
        for x in i_neg..=i_pos {
            for y in x + 1..=i_pos {
                let mid = eh.value(y)? - eh.value(x)?;
                let lower = em.value(y)? - em.value(x)?;
                let upper = ep.value(y)? - ep.value(x)?;
                worst = worst.max(lower - mid).max(mid - upper);
            }
        }
        Some(worst)
    } else {
        None
    };

    Ok(SandwichOutcome { event_held, i_t, max_sandwich_violation })
}

/// Fraction of argmax positions beyond `r * t^(2/3)` for each threshold
/// `r`, from replicated argmax coordinates.
pub fn argmax_tail(argmax_coords: &[f64], t: f64, thresholds: &[f64]) -> Result<Vec<f64>> {
    if argmax_coords.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(t > 0.0) {
        return Err(Error::BadTimeOrder { s: 0.0, t });
    }
    let scale = t.powf(2.0 / 3.0);
    Ok(thresholds
        .iter()
        .map(|r| {
            let hits = argmax_coords.iter().filter(|z| z.abs() > r * scale).count();
            hits as f64 / argmax_coords.len() as f64
        })
        .collect())
}
