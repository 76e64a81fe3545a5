//! Exact pathwise checks: every replication must satisfy each identity to
//! rounding precision, so the reduced statistics are maxima of gaps and
//! counts of violations, with thresholds at zero or at float slack.

use kpz_lab_core::ensemble::{drifted_pair, sample_line_ensemble, sample_two_sided_bm};
use kpz_lab_core::grid::{make_grid, Extended, GridFunction};
use kpz_lab_core::landscape::{
    composition_across_times, coupled_time_split, sample_landscape_slice, ScalingParams,
};
use kpz_lab_core::lpp::{geodesic, LppEndpoint};
use kpz_lab_core::rng::RngKey;
use kpz_lab_core::semigroup::{
    argmax_comparison_check, attractiveness_check, evolve, make_initial, sandwich_event,
    semigroup_gap, InitialKind,
};

use crate::config::{ExperimentConfig, InitialData};
use crate::formats::{samples_csv, write_artifact};
use crate::report::{
    check_ge, check_le, freq_se, mean_se, ExperimentReport, Observation,
};
use crate::runner::replicate;
use crate::scenarios::{build_initial, symmetric_grid};
use crate::Result;

struct Rep {
    witness_gap: f64,
    argmax_violations: usize,
    semigroup_gap: f64,
    geodesic_violations: usize,
    attractiveness_excess: f64,
    hypothesis_held: bool,
    inequality_held: bool,
    event_held: bool,
    i_t: f64,
    sandwich_violation: f64,
    zero_drift_i_t: f64,
    composition_gap: f64,
}

fn one_rep(cfg: &ExperimentConfig, r: usize) -> kpz_lab_core::Result<Rep> {
    let params = ScalingParams::new(cfg.n)?;
    let z_grid = symmetric_grid(cfg.z_halfwidth, cfg.grid_step)?;
    let x_grid = symmetric_grid(cfg.a, cfg.grid_step)?;
    let key = RngKey::new(cfg.master_seed).stream(r as u64);
    let t = cfg.t;

    let slice = sample_landscape_slice(params, 0.0, t, &z_grid, &x_grid, key.substream(1))?;
    let initials = [
        build_initial(InitialData::Flat, &z_grid, key)?,
        build_initial(InitialData::NarrowWedge, &z_grid, key)?,
        build_initial(InitialData::Brownian, &z_grid, key.substream(2))?,
    ];

    // Witness identity: the stored maximum must equal h(Z) + L(Z, x) for the
    // reported argmax Z, bit for bit, and argmaxes must be nondecreasing.
    let mut witness_gap: f64 = 0.0;
    let mut argmax_violations = 0;
    for h in &initials {
        let ep = evolve(h, &slice)?;
        for i in 0..x_grid.count() {
            let z = ep.argmax()[i];
            let h_val = match h.realized().eval(z)? {
                Extended::Finite(v) => v,
                Extended::MinusInf => return Err(kpz_lab_core::Error::NonFiniteValue(z)),
            };
            let diff = (ep.value(i)? - (h_val + slice.value(z, i)?)).abs();
            witness_gap = witness_gap.max(diff);
            if i > 0 && ep.argmax()[i] < ep.argmax()[i - 1] {
                argmax_violations += 1;
            }
        }
    }

    // Two-step evolution through a coupled split matches one-step evolution.
    let split = coupled_time_split(params, 0.0, 0.5 * t, t, &z_grid, &x_grid, key.substream(3))?;
    let mut sg: f64 = 0.0;
    for h in &initials {
        sg = sg.max(semigroup_gap(h, &split.first, &split.second, &split.full)?);
    }

    // Rightmost geodesics from ordered endpoint pairs never cross: every
    // jump of the left pair sits weakly left of the matching jump.
    let e_grid = make_grid(0.0, 1.0, 12)?;
    let ens = sample_line_ensemble(e_grid, 6, key.substream(4))?;
    let left = geodesic(
        &ens,
        LppEndpoint { space_index: 0, line: 6 },
        LppEndpoint { space_index: 9, line: 1 },
    )?;
    let right = geodesic(
        &ens,
        LppEndpoint { space_index: 2, line: 6 },
        LppEndpoint { space_index: 11, line: 1 },
    )?;
    let lj = left.path.expect("geodesic paths requested").jump_indices;
    let rj = right.path.expect("geodesic paths requested").jump_indices;
    let geodesic_violations = lj.iter().zip(&rj).filter(|(a, b)| a > b).count();

    // Attractiveness: ordered increments stay ordered after one growth step.
    let b = sample_two_sided_bm(z_grid, 0.0, 2.0, key.substream(5))?;
    let (lo, hi) = drifted_pair(&z_grid, &b, 0.7)?;
    let h_lo = make_initial(InitialKind::Custom(GridFunction::from_finite(z_grid, lo)?), &z_grid)?;
    let h_hi = make_initial(InitialKind::Custom(GridFunction::from_finite(z_grid, hi)?), &z_grid)?;
    let attractiveness_excess = attractiveness_check(&h_lo, &h_hi, &slice)?;

    // Argmax comparison on a wedge pair whose apexes are strictly ordered,
    // so the hypothesis holds on every sample.
    let w_l = make_initial(InitialKind::NarrowWedge { apex: -2.0 * cfg.grid_step }, &z_grid)?;
    let w_r = make_initial(InitialKind::NarrowWedge { apex: 2.0 * cfg.grid_step }, &z_grid)?;
    let verdict = argmax_comparison_check(&w_l, &w_r, &slice, 0, x_grid.count() - 1)?;

    // Sandwich trial at the configured drift, plus the degenerate trial at
    // drift zero where both tilts coincide and I_t must vanish exactly.
    let b_fn = GridFunction::from_finite(z_grid, b)?;
    let mu = cfg.mu_rule.mu(1.0, t, cfg.a);
    let sw = sandwich_event(&initials[0], &b_fn, mu, cfg.a, &slice)?;
    let sw0 = sandwich_event(&initials[0], &b_fn, 0.0, cfg.a, &slice)?;

    let composition_gap =
        composition_across_times(params, 0.0, 0.4 * t, t, &z_grid, &x_grid, None, key.substream(6))?;

    Ok(Rep {
        witness_gap,
        argmax_violations,
        semigroup_gap: sg,
        geodesic_violations,
        attractiveness_excess,
        hypothesis_held: verdict.hypothesis_held,
        inequality_held: verdict.inequality_held,
        event_held: sw.event_held,
        i_t: sw.i_t,
        sandwich_violation: sw.max_sandwich_violation.unwrap_or(0.0),
        zero_drift_i_t: sw0.i_t,
        composition_gap,
    })
}

pub fn run(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<ExperimentReport> {
    let reps = replicate(pool, cfg.replications, |r| one_rep(cfg, r))?;
    let n = reps.len();

    let witness = reps.iter().map(|r| r.witness_gap).fold(0.0_f64, f64::max);
    let argmax_viol: usize = reps.iter().map(|r| r.argmax_violations).sum();
    let sg = reps.iter().map(|r| r.semigroup_gap).fold(0.0_f64, f64::max);
    let geo_viol: usize = reps.iter().map(|r| r.geodesic_violations).sum();
    let attract = reps.iter().map(|r| r.attractiveness_excess).fold(f64::NEG_INFINITY, f64::max);
    let hyp_freq = reps.iter().filter(|r| r.hypothesis_held).count() as f64 / n as f64;
    let ineq_viol = reps.iter().filter(|r| !r.inequality_held).count();
    let i_t_min = reps.iter().map(|r| r.i_t).fold(f64::INFINITY, f64::min);
    let sw_viol = reps.iter().map(|r| r.sandwich_violation).fold(0.0_f64, f64::max);
    let zero_i_t = reps.iter().map(|r| r.zero_drift_i_t.abs()).fold(0.0_f64, f64::max);
    let comp = reps.iter().map(|r| r.composition_gap).fold(0.0_f64, f64::max);

    let held: Vec<bool> = reps.iter().map(|r| r.event_held).collect();
    let (event_freq, event_se) = freq_se(&held);
    let i_ts: Vec<f64> = reps.iter().map(|r| r.i_t).collect();
    let (i_t_mean, i_t_se) = mean_se(&i_ts);

    let checks = vec![
        check_le("witness_identity_max_gap", witness, 0.0, "recomputed h(Z) + sheet value"),
        check_le("argmax_monotonicity_violations", argmax_viol as f64, 0.0, "rightmost argmax nondecreasing in x"),
        check_le("semigroup_max_gap", sg, 1e-9, "two-step vs one-step evolution"),
        check_le("geodesic_order_violations", geo_viol as f64, 0.0, "ordered endpoints, ordered jumps"),
        check_le("attractiveness_max_excess", attract, 1e-9, "ordered increments stay ordered"),
        check_ge("comparison_hypothesis_frequency", hyp_freq, 1.0, "ordered wedge apexes"),
        check_le("comparison_inequality_violations", ineq_viol as f64, 0.0, "increment ordering under the hypothesis"),
        check_ge("sandwich_i_t_min", i_t_min, -1e-9, "coupling functional is nonnegative"),
        check_le("sandwich_max_violation", sw_viol, 1e-9, "two-sided increment sandwich on held events"),
        check_le("sandwich_zero_drift_i_t", zero_i_t, 0.0, "degenerate tilt pair coincides"),
        check_le("composition_max_gap", comp, 1e-9, "midtime composition identity"),
    ];

    let mu = cfg.mu_rule.mu(1.0, cfg.t, cfg.a);
    let observations = vec![
        Observation::new("sandwich_event_frequency", event_freq, Some(event_se), n),
        Observation::new("sandwich_i_t_mean", i_t_mean, Some(i_t_se), n),
        Observation::new("sandwich_i_t_target", 4.0 * mu * cfg.a, None, n),
    ];

    let rows: Vec<Vec<f64>> = reps
        .iter()
        .enumerate()
        .map(|(i, r)| {
            vec![i as f64, r.semigroup_gap, r.composition_gap, r.attractiveness_excess, r.i_t]
        })
        .collect();
    let csv = samples_csv(
        &["replication", "semigroup_gap", "composition_gap", "attractiveness_excess", "i_t"],
        &rows,
    );
    let artifacts = vec![write_artifact(&cfg.out_dir, "samples/geometry_gaps.csv", &csv)?];

    Ok(ExperimentReport::new(cfg, checks, observations, artifacts))
}
