//! The project's acceptance gates, one numbered criterion per test.
//!
//! Each test prints a single `[criterion N] PASS/FAIL` line and asserts
//! three things: the run's gates all hold, the gate tolerances are the
//! pinned ones (so a config edit cannot silently weaken a criterion), and
//! the run fits its wall-clock budget. Statistical criteria run the full
//! calibrated configs on fixed seeds, so this file is the slow part of the
//! suite; the tests serialize on one lock to keep the budgets honest on a
//! loaded machine.

use std::path::PathBuf;
use std::sync::{Mutex, MutexGuard, PoisonError};
use std::time::{Duration, Instant};

use kpz_lab::config::{ExperimentConfig, InitialData, MuRule};
use kpz_lab::report::ExperimentReport;
use kpz_lab::runner::run_experiment;
use kpz_lab_core::ensemble::sample_line_ensemble;
use kpz_lab_core::grid::make_grid;
use kpz_lab_core::landscape::{composition_across_times, ScalingParams};
use kpz_lab_core::lpp::{
    brute_force_last_passage, composition_identity_gap, last_passage, LppEndpoint,
};
use kpz_lab_core::rng::RngKey;

static LOCK: Mutex<()> = Mutex::new(());

fn serial() -> MutexGuard<'static, ()> {
    LOCK.lock().unwrap_or_else(PoisonError::into_inner)
}

fn out_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kpz-lab-acceptance-{}-{tag}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).expect("clear stale out dir");
    }
    dir
}

/// Prints the criterion verdict line, then asserts it.
fn conclude(criterion: u32, ok: bool, detail: &str) {
    let verdict = if ok { "PASS" } else { "FAIL" };
    println!("[criterion {criterion}] {verdict} - {detail}");
    assert!(ok, "[criterion {criterion}] {detail}");
}

fn budget(criterion: u32, elapsed: Duration, limit: Duration) {
    assert!(
        elapsed <= limit,
        "[criterion {criterion}] took {:.1}s, budget {:.0}s",
        elapsed.as_secs_f64(),
        limit.as_secs_f64()
    );
}

fn find_check<'a>(report: &'a ExperimentReport, name: &str) -> &'a kpz_lab::report::CheckRecord {
    report
        .checks
        .iter()
        .find(|c| c.name == name)
        .unwrap_or_else(|| panic!("gate `{name}` missing from report"))
}

/// The gate must exist, hold, and carry exactly the pinned tolerance.
fn assert_gate(report: &ExperimentReport, name: &str, threshold: f64) {
    let c = find_check(report, name);
    assert!(
        (c.threshold - threshold).abs() <= 1e-12,
        "gate `{name}` tolerance drifted: {} vs pinned {threshold}",
        c.threshold
    );
    assert!(c.passed, "gate `{name}` failed: observed {:e} vs {:e}", c.observed, c.threshold);
}

/// For gates whose threshold is data-dependent (two-standard-error bands).
fn assert_gate_holds(report: &ExperimentReport, name: &str) {
    let c = find_check(report, name);
    assert!(c.passed, "gate `{name}` failed: observed {:e} vs {:e}", c.observed, c.threshold);
}

fn observation(report: &ExperimentReport, name: &str) -> f64 {
    report
        .observations
        .iter()
        .find(|o| o.name == name)
        .unwrap_or_else(|| panic!("observation `{name}` missing from report"))
        .value
}

#[test]
fn c01_oracle_equivalence_on_small_instances() {
    let _guard = serial();
    let started = Instant::now();

    // 500 deterministic instances sweeping grid size 2..=8, line count
    // 1..=4, fractional steps and shifted origins, and both interior and
    // full-window endpoints.
    let mut max_diff = 0.0_f64;
    for i in 0..500_u64 {
        let count = 2 + (i % 7) as usize;
        let k = 1 + (i % 4) as usize;
        let origin = -1.0 + (i % 5) as f64 * 0.1;
        let step = 0.2 + (i % 3) as f64 * 0.15;
        let grid = make_grid(origin, step, count).unwrap();
        let ens = sample_line_ensemble(grid, k, RngKey::new(1999).stream(i)).unwrap();

        let s_idx = (i as usize / 7) % count;
        let e_idx = s_idx + (i as usize / 11) % (count - s_idx);
        let start = LppEndpoint { space_index: s_idx, line: k };
        let end = LppEndpoint { space_index: e_idx, line: 1 };

        let fast = last_passage(&ens, start, end).unwrap();
        let oracle = brute_force_last_passage(&ens, start, end, None).unwrap();
        oracle.path.as_ref().expect("oracle returns a path").validate().unwrap();
        max_diff = max_diff.max((fast - oracle.value).abs());
    }

    let elapsed = started.elapsed();
    budget(1, elapsed, Duration::from_secs(5));
    conclude(
        1,
        max_diff <= 1e-9,
        &format!("max |fast - oracle| = {max_diff:e} over 500 instances in {:.2}s", elapsed.as_secs_f64()),
    );
}

#[test]
fn c02_composition_is_exact_on_grids_and_across_times() {
    let _guard = serial();
    let started = Instant::now();

    // Split identity inside one ensemble: 100 environments, 20 lines on
    // 200 points, cycling the endpoints and the middle line.
    let grid = make_grid(0.0, 0.1, 200).unwrap();
    let mut max_gap = 0.0_f64;
    for e in 0..100_u64 {
        let ens = sample_line_ensemble(grid, 20, RngKey::new(4242).stream(e)).unwrap();
        let s_idx = (e as usize * 3) % 40;
        let e_idx = 199 - (e as usize * 7) % 60;
        let mid = 1 + (e as usize) % 20;
        let start = LppEndpoint { space_index: s_idx, line: 20 };
        let end = LppEndpoint { space_index: e_idx, line: 1 };
        let gap = composition_identity_gap(&ens, start, end, mid).unwrap();
        max_gap = max_gap.max(gap);
    }

    // Composition of the rescaled field across a line-aligned middle time,
    // maximizing over the full middle grid.
    let params = ScalingParams::new(25.0).unwrap();
    let z_grid = make_grid(-0.6, 0.3, 5).unwrap();
    let x_grid = make_grid(-0.6, 0.3, 5).unwrap();
    let mut max_time_gap = 0.0_f64;
    for (ti, &(r, s, t)) in [(0.0, 0.48, 1.0), (0.0, 0.2, 0.6), (0.25, 0.52, 0.75)]
        .iter()
        .enumerate()
    {
        for rep in 0..5_u64 {
            let key = RngKey::new(7100 + ti as u64).stream(rep);
            let gap = composition_across_times(params, r, s, t, &z_grid, &x_grid, None, key).unwrap();
            max_time_gap = max_time_gap.max(gap);
        }
    }

    let elapsed = started.elapsed();
    budget(2, elapsed, Duration::from_secs(30));
    conclude(
        2,
        max_gap <= 1e-9 && max_time_gap <= 1e-9,
        &format!(
            "split gap {max_gap:e}, across-times gap {max_time_gap:e} in {:.2}s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c03_geometry_suite_is_exact() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults("geometry").unwrap();
    assert_eq!(cfg.replications, 200);
    assert_eq!(cfg.n, 50.0);
    cfg.out_dir = out_dir("c03");

    let started = Instant::now();
    let report = run_experiment(&cfg).unwrap();
    let elapsed = started.elapsed();

    assert_gate(&report, "witness_identity_max_gap", 0.0);
    assert_gate(&report, "argmax_monotonicity_violations", 0.0);
    assert_gate(&report, "semigroup_max_gap", 1e-9);
    assert_gate(&report, "geodesic_order_violations", 0.0);
    assert_gate(&report, "attractiveness_max_excess", 1e-9);
    assert_gate(&report, "comparison_hypothesis_frequency", 1.0);
    assert_gate(&report, "comparison_inequality_violations", 0.0);
    assert_gate(&report, "sandwich_max_violation", 1e-9);
    assert_gate(&report, "sandwich_zero_drift_i_t", 0.0);
    assert_gate(&report, "composition_max_gap", 1e-9);

    budget(3, elapsed, Duration::from_secs(120));
    conclude(
        3,
        report.passed(),
        &format!(
            "{} exact gates, zero violations over {} replications in {:.1}s",
            report.checks.len(),
            cfg.replications,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c04_brownian_increments_are_stationary() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults("local-brownian").unwrap();
    // The criterion pins the run: zero-drift Brownian start, n = 200,
    // t = 1, a thousand replications on seed 7.
    assert_eq!(cfg.initial, InitialData::Brownian);
    assert_eq!(cfg.n, 200.0);
    assert_eq!(cfg.t, 1.0);
    assert_eq!(cfg.replications, 1000);
    assert_eq!(cfg.master_seed, 7);
    assert_eq!(cfg.offsets, vec![0.25, 0.5, 1.0]);
    cfg.out_dir = out_dir("c04");

    let started = Instant::now();
    let report = run_experiment(&cfg).unwrap();
    let elapsed = started.elapsed();

    for x in ["0.25", "0.5", "1"] {
        assert_gate(&report, &format!("eps1_x{x}_variance_ratio.lower"), 0.85);
        assert_gate(&report, &format!("eps1_x{x}_variance_ratio.upper"), 1.15);
        assert_gate(&report, &format!("eps1_x{x}_ks_gaussian"), 0.08);
    }

    budget(4, elapsed, Duration::from_secs(600));
    let r = |x: &str| {
        find_check(&report, &format!("eps1_x{x}_variance_ratio.lower")).observed
    };
    conclude(
        4,
        report.passed(),
        &format!(
            "variance ratios {:.3}/{:.3}/{:.3} in [0.85, 1.15], ks < 0.08, {:.1}s",
            r("0.25"),
            r("0.5"),
            r("1"),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c05_narrow_wedge_local_limit() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults("local-brownian").unwrap();
    // The criterion pins the initial data, the epsilon pair, the variance
    // band, the Hoelder exponent, and the drift rule; the remaining knobs
    // are this project's calibrated design. The comparison event needs
    // mu t^(1/3) large to hold with high frequency, so the run uses a
    // longer horizon than the stationarity gate.
    cfg.initial = InitialData::NarrowWedge;
    cfg.epsilon_list = vec![0.1, 0.05];
    cfg.mu_rule = MuRule::EpsPower;
    cfg.n = 25.0;
    cfg.t = 6.0;
    cfg.grid_step = 0.05;
    cfg.oversample = 64;
    cfg.z_step = 0.25;
    cfg.z_halfwidth = 10.0;
    cfg.a = 4.0;
    cfg.offsets = vec![1.0, 2.0, 4.0];
    cfg.replications = 600;
    cfg.master_seed = 13;
    cfg.out_dir = out_dir("c05");

    let started = Instant::now();
    let report = run_experiment(&cfg).unwrap();
    let elapsed = started.elapsed();

    for eps in ["0.1", "0.05"] {
        for x in ["1", "2", "4"] {
            assert_gate(&report, &format!("eps{eps}_x{x}_variance_ratio.lower"), 0.7);
            assert_gate(&report, &format!("eps{eps}_x{x}_variance_ratio.upper"), 1.3);
        }
        assert_gate(&report, &format!("eps{eps}_holder_0.45_max_over_median"), 2.0);
        assert_gate(&report, &format!("eps{eps}_sandwich_event_frequency"), 0.9);
        for stat in ["median", "max"] {
            let v = observation(&report, &format!("eps{eps}_holder_0.45_{stat}"));
            assert!(v.is_finite() && v > 0.0, "holder {stat} at eps {eps} not finite: {v}");
        }
    }

    budget(5, elapsed, Duration::from_secs(900));
    conclude(
        5,
        report.passed(),
        &format!(
            "variance in [0.7, 1.3], holder max/median < 2, sandwich freq {:.3}/{:.3} >= 0.9, {:.1}s",
            find_check(&report, "eps0.1_sandwich_event_frequency").observed,
            find_check(&report, "eps0.05_sandwich_event_frequency").observed,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c06_sheet_increments_and_parabola() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults("airy-sheet").unwrap();
    assert_eq!(cfg.epsilon_list, vec![0.1]);
    assert_eq!(cfg.n, 200.0);
    assert_eq!(cfg.replications, 1000);
    cfg.out_dir = out_dir("c06");

    let started = Instant::now();
    let report = run_experiment(&cfg).unwrap();
    let elapsed = started.elapsed();

    for pair in ["z0_x1", "z1_x0", "z1_x1", "z1_x-1", "z-1_x1"] {
        assert_gate(&report, &format!("pair_{pair}_variance_ratio.lower"), 0.7);
        assert_gate(&report, &format!("pair_{pair}_variance_ratio.upper"), 1.3);
    }
    assert_gate(&report, "cross_increment_correlation_abs", 0.15);
    assert_gate(&report, "parabola_identity_max_gap", 0.0);

    budget(6, elapsed, Duration::from_secs(900));
    conclude(
        6,
        report.passed(),
        &format!(
            "five pair variances in [0.7, 1.3], |rho| = {:.3} < 0.15, parabola gap {:e}, {:.1}s",
            find_check(&report, "cross_increment_correlation_abs").observed,
            find_check(&report, "parabola_identity_max_gap").observed,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c07_long_time_memory_loss() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults("long-time-coupling").unwrap();
    assert_eq!(cfg.a, 1.0);
    assert_eq!(cfg.eta, 0.5);
    assert_eq!(cfg.t_list, vec![1.0, 4.0, 16.0]);
    assert_eq!(cfg.mu_rule, MuRule::RRule);
    assert_eq!(cfg.replications, 500);
    cfg.out_dir = out_dir("c07");

    let started = Instant::now();
    let report = run_experiment(&cfg).unwrap();
    let elapsed = started.elapsed();

    for t in ["1", "4", "16"] {
        assert_gate_holds(&report, &format!("t{t}_i_t_gap"));
    }
    assert_gate_holds(&report, "exceedance_step_t1_to_t4");
    assert_gate_holds(&report, "exceedance_step_t4_to_t16");
    assert_gate(&report, "exceedance_final_minus_first", 0.0);
    assert_gate(&report, "threshold_nesting_violations", 0.0);

    budget(7, elapsed, Duration::from_secs(1200));
    conclude(
        7,
        report.passed(),
        &format!(
            "exceedance nonincreasing, final - first = {:.4} < 0, i_t within two stderr at all t, {:.1}s",
            find_check(&report, "exceedance_final_minus_first").observed,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c08_rescaled_pipeline_matches_direct() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults("invariance-123").unwrap();
    assert_eq!(cfg.gamma_list, vec![1.0, 2.0]);
    assert_eq!(cfg.replications, 1000);
    cfg.out_dir = out_dir("c08");

    let started = Instant::now();
    let report = run_experiment(&cfg).unwrap();
    let elapsed = started.elapsed();

    assert_gate(&report, "gamma1_ks", 0.05);
    assert_gate(&report, "gamma2_ks", 0.12);

    budget(8, elapsed, Duration::from_secs(600));
    conclude(
        8,
        report.passed(),
        &format!(
            "ks {:.4} < 0.05 at gamma 1, {:.4} < 0.12 at gamma 2, {:.1}s",
            find_check(&report, "gamma1_ks").observed,
            find_check(&report, "gamma2_ks").observed,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c09_tilted_max_slope_probe() {
    let _guard = serial();
    let mut cfg = ExperimentConfig::defaults("argmax-uniqueness").unwrap();
    assert_eq!(cfg.replications, 2000);
    cfg.out_dir = out_dir("c09");

    let started = Instant::now();
    let report = run_experiment(&cfg).unwrap();
    let elapsed = started.elapsed();

    assert_gate(&report, "parabola_slope_abs", 1e-12);
    assert_gate(&report, "parabola_ez_abs", 1e-12);
    assert_gate(&report, "two_peak_kink_gap", 1.5);
    assert_gate_holds(&report, "brownian_parabola_slope_vs_ez");

    budget(9, elapsed, Duration::from_secs(300));
    conclude(
        9,
        report.passed(),
        &format!(
            "parabola slope exact, kink gap {:.2} >= 1.5, slope - mean argmax within two stderr, {:.1}s",
            find_check(&report, "two_peak_kink_gap").observed,
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn c10_reports_are_thread_count_invariant() {
    let _guard = serial();
    let mut bodies: Vec<Vec<u8>> = Vec::new();
    for threads in [1_usize, 2, 8] {
        let mut cfg = ExperimentConfig::defaults("geometry").unwrap();
        cfg.n = 20.0;
        cfg.replications = 50;
        cfg.threads = threads;
        cfg.out_dir = out_dir(&format!("c10-t{threads}"));
        run_experiment(&cfg).unwrap();
        bodies.push(std::fs::read(cfg.out_dir.join("report.json")).unwrap());
    }
    let identical = bodies.windows(2).all(|w| w[0] == w[1]);
    conclude(
        10,
        identical,
        &format!("report.json byte-identical at 1, 2, 8 threads ({} bytes)", bodies[0].len()),
    );
}
