//! Last passage values, profiles, and geodesics across a line ensemble.
//!
//! A path from `start` to `end` moves weakly right in space and weakly up
//! through the lines (line numbers decrease; line 1 is on top). It is a
//! staircase described by the grid indices at which it jumps from one line to
//! the next line up, and it collects the increment of each line over the
//! stretch it spends there. The last passage value is the maximum collected
//! sum over all such staircases.
//!
//! Two independent implementations live here on purpose. The production
//! kernel is a forward dynamic-programming sweep; [`brute_force_last_passage`]
//! enumerates every staircase directly and exists to certify the kernel on
//! small instances. They share no code beyond the data types.

use serde::{Deserialize, Serialize};

use crate::ensemble::LineEnsemble;
use crate::error::{Error, Result};

/// Default cap on brute-force enumeration size.
pub const CANDIDATE_BUDGET: u128 = 1_000_000;

/// One end of a last passage path: a grid index and a line number (1-based,
/// line 1 on top). Spatial positions are indices, not coordinates, so
/// endpoint identity is exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LppEndpoint {
    pub space_index: usize,
    pub line: usize,
}

/// Staircase from `start` to `end`: `jump_indices[i]` is the grid index at
/// which the path leaves line `start.line - i` for the line above. The
/// sequence is nondecreasing and stays inside the endpoint window; a path
/// within a single line has no jumps.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeodesicPath {
    pub start: LppEndpoint,
    pub end: LppEndpoint,
    pub jump_indices: Vec<usize>,
}

impl GeodesicPath {
    /// Checks the staircase shape: jump count matches the line span, jumps
    /// are nondecreasing, and all jumps lie in the endpoint window.
    pub fn validate(&self) -> Result<()> {
        if self.start.line < self.end.line || self.start.space_index > self.end.space_index {
            return Err(Error::BadEndpointOrder);
        }
        let want = self.start.line - self.end.line;
        if self.jump_indices.len() != want {
            return Err(Error::BadJumpSequence(format!(
                "{} jumps for a span of {} lines",
                self.jump_indices.len(),
                want
            )));
        }
        let mut prev = self.start.space_index;
        for &j in &self.jump_indices {
            if j < prev {
                return Err(Error::BadJumpSequence(format!(
                    "jump index {j} decreases below {prev}"
                )));
            }
            prev = j;
        }
        if prev > self.end.space_index {
            return Err(Error::BadJumpSequence(format!(
                "jump index {prev} beyond end index {}",
                self.end.space_index
            )));
        }
        Ok(())
    }

    /// Value collected by this staircase: the sum over visited lines of the
    /// line's increment between entry and exit index.
    pub fn value(&self, ensemble: &LineEnsemble) -> Result<f64> {
        self.validate()?;
        check_endpoint(ensemble, self.start)?;
        check_endpoint(ensemble, self.end)?;
        let mut total = 0.0;
        let mut enter = self.start.space_index;
        for (i, &exit) in self.jump_indices.iter().enumerate() {
            let f = ensemble.line(self.start.line - i)?;
            total += f[exit] - f[enter];
            enter = exit;
        }
        let f = ensemble.line(self.end.line)?;
        total += f[self.end.space_index] - f[enter];
        Ok(total)
    }
}

/// Last passage value together with the path that attains it, when the
/// computation tracked one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LppValue {
    pub value: f64,
    pub path: Option<GeodesicPath>,
}

fn check_endpoint(ensemble: &LineEnsemble, p: LppEndpoint) -> Result<()> {
    let lines = ensemble.line_count();
    if p.line == 0 || p.line > lines {
        return Err(Error::LineOutOfRange { line: p.line, lines });
    }
    let count = ensemble.grid().count();
    if p.space_index >= count {
        return Err(Error::IndexOutOfRange { index: p.space_index, count });
    }
    Ok(())
}

fn check_pair(ensemble: &LineEnsemble, start: LppEndpoint, end: LppEndpoint) -> Result<()> {
    check_endpoint(ensemble, start)?;
    check_endpoint(ensemble, end)?;
    if start.line < end.line || start.space_index > end.space_index {
        return Err(Error::BadEndpointOrder);
    }
    Ok(())
}

/// Forward sweep producing the best-value row on every line from
/// `start.line` down to `end_line`; `rows[i][x]` is the last passage value
/// from `start` to `(x, start.line - i)`, minus infinity where no path exists.
///
/// The recurrence per lower row `prev` and line data `f` is
/// `row[x] = f[x] + max_{e <= x} (prev[e] - f[e])`, carried by a running
/// maximum, so each row costs one pass. Minus infinity is a raw float here;
/// it is absorbing under both `max` and `+` and the line data is finite, so
/// no NaN can form.
fn dp_rows(
    ensemble: &LineEnsemble,
    start: LppEndpoint,
    end_line: usize,
) -> Result<Vec<Vec<f64>>> {
    let count = ensemble.grid().count();
    let f_top = ensemble.line(start.line)?;
    let mut seed = vec![f64::NEG_INFINITY; count];
    for x in start.space_index..count {
        seed[x] = f_top[x] - f_top[start.space_index];
    }
    let mut rows = Vec::with_capacity(start.line - end_line + 1);
    rows.push(seed);
    for line in (end_line..start.line).rev() {
        let f = ensemble.line(line)?;
        let prev = rows.last().expect("rows start nonempty");
        let mut row = vec![f64::NEG_INFINITY; count];
        let mut best = f64::NEG_INFINITY;
        for x in 0..count {
            let cand = prev[x] - f[x];
            if cand > best {
                best = cand;
            }
            row[x] = f[x] + best;
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Last passage value from `start` to `end`.
pub fn last_passage(ensemble: &LineEnsemble, start: LppEndpoint, end: LppEndpoint) -> Result<f64> {
    let profile = last_passage_profile(ensemble, start, end.line)?;
    check_endpoint(ensemble, end)?;
    if start.space_index > end.space_index {
        return Err(Error::BadEndpointOrder);
    }
    Ok(profile[end.space_index])
}

/// Last passage values from `start` to every `(x, end_line)` in one sweep;
/// entries left of the start are minus infinity.
pub fn last_passage_profile(
    ensemble: &LineEnsemble,
    start: LppEndpoint,
    end_line: usize,
) -> Result<Vec<f64>> {
    check_pair(
        ensemble,
        start,
        LppEndpoint { space_index: start.space_index, line: end_line },
    )?;
    let count = ensemble.grid().count();
    let f_top = ensemble.line(start.line)?;
    let mut row = vec![f64::NEG_INFINITY; count];
    for x in start.space_index..count {
        row[x] = f_top[x] - f_top[start.space_index];
    }
    for line in (end_line..start.line).rev() {
        let f = ensemble.line(line)?;
        let mut best = f64::NEG_INFINITY;
        // in place: row[x] is read before it is overwritten and the running
        // maximum only looks left, so one buffer suffices
        for x in 0..count {
            let cand = row[x] - f[x];
            if cand > best {
                best = cand;
            }
            row[x] = f[x] + best;
        }
    }
    Ok(row)
}

/// Last passage value from `start` to `end` together with the rightmost
/// geodesic attaining it.
///
/// The backtrack walks from the end down the stored rows. At line `j` and
/// position `x` it scans entry candidates `e` from `x` leftward and takes the
/// first `e` whose recomputed value `f_j[x] + (row_below[e] - f_j[e])` equals
/// the stored `row_j[x]`. The forward sweep built `row_j[x]` from exactly
/// this expression for some `e`, and the running maximum returns one of its
/// operands unchanged, so the comparison is between bit-identical floats and
/// the first hit from the right is the rightmost maximizer.
pub fn geodesic(
    ensemble: &LineEnsemble,
    start: LppEndpoint,
    end: LppEndpoint,
) -> Result<LppValue> {
    check_pair(ensemble, start, end)?;
    let rows = dp_rows(ensemble, start, end.line)?;
    let value = rows.last().expect("rows nonempty")[end.space_index];
    let mut jumps_rev = Vec::with_capacity(start.line - end.line);
    let mut x = end.space_index;
    // rows[i] is line start.line - i; walk i from the end row back to 1
    for i in (1..rows.len()).rev() {
        let line = start.line - i;
        let f = ensemble.line(line)?;
        let below = &rows[i - 1];
        let target = rows[i][x];
        let mut entry = None;
        for e in (start.space_index..=x).rev() {
            if f[x] + (below[e] - f[e]) == target {
                entry = Some(e);
                break;
            }
        }
        let e = entry.ok_or_else(|| {
            Error::BadJumpSequence(format!("no entry point found on line {line}"))
        })?;
        jumps_rev.push(e);
        x = e;
    }
    jumps_rev.reverse();
    let path = GeodesicPath { start, end, jump_indices: jumps_rev };
    path.validate()?;
    Ok(LppValue { value, path: Some(path) })
}

/// Number of nondecreasing jump tuples: `C(points + jumps - 1, jumps)`,
/// saturating far beyond any usable budget.
fn staircase_count(points: u128, jumps: u128) -> u128 {
    if jumps == 0 {
        return 1;
    }
    let mut c: u128 = 1;
    for i in 0..jumps {
        c = match c.checked_mul(points + jumps - 1 - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// Direct enumeration of every staircase from `start` to `end`, taking the
/// maximum value and the rightmost maximizing path. Exists to certify the
/// sweep kernel; refuses instances with more candidates than `budget`
/// (default [`CANDIDATE_BUDGET`]).
pub fn brute_force_last_passage(
    ensemble: &LineEnsemble,
    start: LppEndpoint,
    end: LppEndpoint,
    budget: Option<u128>,
) -> Result<LppValue> {
    check_pair(ensemble, start, end)?;
    let budget = budget.unwrap_or(CANDIDATE_BUDGET);
    let jumps = start.line - end.line;
    let points = end.space_index - start.space_index + 1;
    let candidates = staircase_count(points as u128, jumps as u128);
    if candidates > budget {
        return Err(Error::InstanceTooLarge { candidates, budget });
    }

    let mut best_value = f64::NEG_INFINITY;
    let mut best_jumps: Vec<usize> = Vec::new();
    let mut current = vec![start.space_index; jumps];
    loop {
        let path = GeodesicPath { start, end, jump_indices: current.clone() };
        let v = path.value(ensemble)?;
        // ties resolve to the lexicographically largest tuple, which for
        // staircases is the rightmost path
        if v > best_value || (v == best_value && current > best_jumps) {
            best_value = v;
            best_jumps = current.clone();
        }
        // advance to the next nondecreasing tuple in lexicographic order
        let mut i = jumps;
        loop {
            if i == 0 {
                let path = GeodesicPath { start, end, jump_indices: best_jumps };
                return Ok(LppValue { value: best_value, path: Some(path) });
            }
            i -= 1;
            if current[i] < end.space_index {
                current[i] += 1;
                let v = current[i];
                for slot in current[i + 1..].iter_mut() {
                    *slot = v;
                }
                break;
            }
        }
    }
}

/// Absolute gap in the split identity: the last passage value from `start`
/// to `end` against the best split through `mid_line`, maximizing over the
/// crossing position. Zero in exact arithmetic for any `mid_line` between
/// the endpoint lines; a float residual here bounds the kernel's rounding.
pub fn composition_identity_gap(
    ensemble: &LineEnsemble,
    start: LppEndpoint,
    end: LppEndpoint,
    mid_line: usize,
) -> Result<f64> {
    check_pair(ensemble, start, end)?;
    if mid_line < end.line || mid_line > start.line {
        return Err(Error::LineOutOfRange { line: mid_line, lines: ensemble.line_count() });
    }
    let direct = last_passage(ensemble, start, end)?;
    let to_mid = last_passage_profile(ensemble, start, mid_line)?;
    let mut split = f64::NEG_INFINITY;
    for z in start.space_index..=end.space_index {
        let from_mid = last_passage(
            ensemble,
            LppEndpoint { space_index: z, line: mid_line },
            end,
        )?;
        let s = to_mid[z] + from_mid;
        if s > split {
            split = s;
        }
    }
    Ok((direct - split).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;
    use crate::rng::RngKey;

    /// Two lines on {0, 1, 2}: top cumulative (0, 1, 5), bottom (0, 3, 1).
    /// From the bottom-left corner to the top-right corner the three
    /// staircases collect 5, 7, 1, so the value is 7 with the jump at 1.
    fn tiny_fixture() -> LineEnsemble {
        let g = make_grid(0.0, 1.0, 3).unwrap();
        LineEnsemble::from_lines(g, vec![vec![0.0, 1.0, 5.0], vec![0.0, 3.0, 1.0]]).unwrap()
    }

    fn corner_to_corner(e: &LineEnsemble) -> (LppEndpoint, LppEndpoint) {
        let start = LppEndpoint { space_index: 0, line: e.line_count() };
        let end = LppEndpoint { space_index: e.grid().count() - 1, line: 1 };
        (start, end)
    }

    #[test]
    fn frozen_two_line_example() {
        let e = tiny_fixture();
        let (start, end) = corner_to_corner(&e);
        assert_eq!(last_passage(&e, start, end).unwrap(), 7.0);
        let g = geodesic(&e, start, end).unwrap();
        assert_eq!(g.value, 7.0);
        assert_eq!(g.path.as_ref().unwrap().jump_indices, vec![1]);
        let o = brute_force_last_passage(&e, start, end, None).unwrap();
        assert_eq!(o.value, 7.0);
        assert_eq!(o.path.unwrap().jump_indices, vec![1]);
    }

    #[test]
    fn frozen_example_candidate_values() {
        let e = tiny_fixture();
        let (start, end) = corner_to_corner(&e);
        let values: Vec<f64> = (0..=2)
            .map(|j| {
                GeodesicPath { start, end, jump_indices: vec![j] }
                    .value(&e)
                    .unwrap()
            })
            .collect();
        assert_eq!(values, vec![5.0, 7.0, 1.0]);
    }

    #[test]
    fn single_line_passage_is_an_increment() {
        let e = tiny_fixture();
        let start = LppEndpoint { space_index: 0, line: 1 };
        let end = LppEndpoint { space_index: 2, line: 1 };
        assert_eq!(last_passage(&e, start, end).unwrap(), 5.0);
        let g = geodesic(&e, start, end).unwrap();
        assert!(g.path.unwrap().jump_indices.is_empty());
    }

    #[test]
    fn rejects_bad_endpoints() {
        let e = tiny_fixture();
        let ok = LppEndpoint { space_index: 0, line: 2 };
        assert_eq!(
            last_passage(&e, LppEndpoint { space_index: 0, line: 3 }, ok).unwrap_err(),
            Error::LineOutOfRange { line: 3, lines: 2 }
        );
        assert_eq!(
            last_passage(&e, LppEndpoint { space_index: 5, line: 2 }, ok).unwrap_err(),
            Error::IndexOutOfRange { index: 5, count: 3 }
        );
        // start strictly right of end
        assert_eq!(
            last_passage(
                &e,
                LppEndpoint { space_index: 2, line: 2 },
                LppEndpoint { space_index: 0, line: 1 }
            )
            .unwrap_err(),
            Error::BadEndpointOrder
        );
        // start on a higher line than end
        assert_eq!(
            last_passage(
                &e,
                LppEndpoint { space_index: 0, line: 1 },
                LppEndpoint { space_index: 2, line: 2 }
            )
            .unwrap_err(),
            Error::BadEndpointOrder
        );
    }

    #[test]
    fn profile_is_minus_infinity_left_of_start() {
        let e = tiny_fixture();
        let start = LppEndpoint { space_index: 1, line: 2 };
        let p = last_passage_profile(&e, start, 1).unwrap();
        assert_eq!(p[0], f64::NEG_INFINITY);
        assert!(p[1].is_finite() && p[2].is_finite());
        // profile entries match individual calls
        for x in 1..=2 {
            let v = last_passage(&e, start, LppEndpoint { space_index: x, line: 1 }).unwrap();
            assert_eq!(p[x], v);
        }
    }

    #[test]
    fn path_value_matches_kernel_value() {
        let g = make_grid(0.0, 0.125, 33).unwrap();
        for seed in 0..20 {
            let e = crate::ensemble::sample_line_ensemble(g, 4, RngKey::new(seed)).unwrap();
            let (start, end) = corner_to_corner(&e);
            let got = geodesic(&e, start, end).unwrap();
            let replay = got.path.as_ref().unwrap().value(&e).unwrap();
            assert!(
                (replay - got.value).abs() <= 1e-12,
                "seed {seed}: path value {replay} vs kernel {got:?}"
            );
        }
    }

    #[test]
    fn oracle_agrees_with_kernel_on_random_instances() {
        let g = make_grid(0.0, 0.2, 7).unwrap();
        for seed in 0..50 {
            let e = crate::ensemble::sample_line_ensemble(g, 3, RngKey::new(seed)).unwrap();
            let start = LppEndpoint { space_index: (seed % 3) as usize, line: 3 };
            let end = LppEndpoint { space_index: 6 - (seed % 2) as usize, line: 1 };
            let fast = geodesic(&e, start, end).unwrap();
            let slow = brute_force_last_passage(&e, start, end, None).unwrap();
            assert!((fast.value - slow.value).abs() <= 1e-9);
            assert_eq!(fast.path, slow.path, "seed {seed}");
        }
    }

    #[test]
    fn oracle_refuses_oversized_instances() {
        let g = make_grid(0.0, 0.01, 400).unwrap();
        let e = crate::ensemble::sample_line_ensemble(g, 8, RngKey::new(1)).unwrap();
        let (start, end) = corner_to_corner(&e);
        match brute_force_last_passage(&e, start, end, None).unwrap_err() {
            Error::InstanceTooLarge { candidates, budget } => {
                assert!(candidates > budget);
                assert_eq!(budget, CANDIDATE_BUDGET);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn geodesic_breaks_ties_to_the_right() {
        // two identical flat lines: every staircase collects 0, so the
        // rightmost geodesic jumps at the last possible index
        let g = make_grid(0.0, 1.0, 4).unwrap();
        let e = LineEnsemble::from_lines(g, vec![vec![0.0; 4], vec![0.0; 4]]).unwrap();
        let (start, end) = corner_to_corner(&e);
        let fast = geodesic(&e, start, end).unwrap();
        assert_eq!(fast.path.as_ref().unwrap().jump_indices, vec![3]);
        let slow = brute_force_last_passage(&e, start, end, None).unwrap();
        assert_eq!(fast.path, slow.path);
    }

    #[test]
    fn split_identity_gap_is_tiny() {
        let g = make_grid(0.0, 0.05, 81).unwrap();
        for seed in 0..10 {
            let e = crate::ensemble::sample_line_ensemble(g, 5, RngKey::new(seed)).unwrap();
            let (start, end) = corner_to_corner(&e);
            for mid in 1..=5 {
                let gap = composition_identity_gap(&e, start, end, mid).unwrap();
                assert!(gap <= 1e-9, "seed {seed} mid {mid}: gap {gap}");
            }
        }
    }

    #[test]
    fn superadditivity_holds_per_sample() {
        let g = make_grid(0.0, 0.05, 81).unwrap();
        for seed in 0..10 {
            let e = crate::ensemble::sample_line_ensemble(g, 5, RngKey::new(seed)).unwrap();
            let (start, end) = corner_to_corner(&e);
            let whole = last_passage(&e, start, end).unwrap();
            let mid = LppEndpoint { space_index: 40, line: 3 };
            let a = last_passage(&e, start, mid).unwrap();
            let b = last_passage(&e, mid, end).unwrap();
            assert!(whole >= a + b - 1e-9, "seed {seed}: {whole} < {a} + {b}");
        }
    }

    #[test]
    fn path_validation_rejects_malformed_staircases() {
        let e = tiny_fixture();
        let (start, end) = corner_to_corner(&e);
        let wrong_count = GeodesicPath { start, end, jump_indices: vec![] };
        assert!(matches!(wrong_count.value(&e).unwrap_err(), Error::BadJumpSequence(_)));
        let decreasing = GeodesicPath {
            start: LppEndpoint { space_index: 1, line: 2 },
            end,
            jump_indices: vec![0],
        };
        assert!(matches!(decreasing.value(&e).unwrap_err(), Error::BadJumpSequence(_)));
    }

    #[test]
    fn staircase_count_matches_enumeration() {
        assert_eq!(staircase_count(3, 1), 3);
        assert_eq!(staircase_count(3, 2), 6);
        assert_eq!(staircase_count(8, 3), 120);
        assert_eq!(staircase_count(5, 0), 1);
        // saturates instead of overflowing
        assert_eq!(staircase_count(u128::MAX / 2, 3), u128::MAX);
    }
}
