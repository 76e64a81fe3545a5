//! Long-time coupling: two profiles grown from independent initial data
//! through one landscape realization lose the memory of where they
//! started, so the sup-distance between their increment processes on
//! `[-a, a]` exceeds `eta * sqrt(a)` less and less often as `t` grows.
//! Alongside the trend, the drift-sandwich functional `I_t` is measured
//! against its exact mean `4 * mu * a` with `mu` from the `r`-rule.

use kpz_lab_core::landscape::{sample_landscape_slice, ScalingParams};
use kpz_lab_core::rng::RngKey;
use kpz_lab_core::semigroup::{evolve, sandwich_event};

use crate::config::{ExperimentConfig, InitialData};
use crate::formats::{samples_csv, write_artifact};
use crate::plots::{line_plot, Series};
use crate::report::{check_le, freq_se, mean_se, ExperimentReport, Observation};
use crate::runner::replicate;
use crate::scenarios::{build_initial, symmetric_grid};
use crate::Result;

struct TimeRep {
    sup_diff: f64,
    exceed: bool,
    exceed_wide: bool,
    i_t: f64,
}

fn one_rep(cfg: &ExperimentConfig, r: usize) -> kpz_lab_core::Result<Vec<TimeRep>> {
    let params = ScalingParams::new(cfg.n)?;
    let x_grid = symmetric_grid(cfg.a, cfg.grid_step)?;
    let key = RngKey::new(cfg.master_seed).stream(r as u64);
    let threshold = cfg.eta * cfg.a.sqrt();

    let mut out = Vec::with_capacity(cfg.t_list.len());
    for (ti, &t) in cfg.t_list.iter().enumerate() {
        let z_grid = symmetric_grid(cfg.z_halfwidth_at(t), cfg.grid_step)?;
        let tkey = key.substream(1).child(ti as u64);
        let slice = sample_landscape_slice(params, 0.0, t, &z_grid, &x_grid, tkey)?;

        let h = build_initial(cfg.initial, &z_grid, key.substream(2).child(ti as u64))?;
        let b = build_initial(cfg.initial, &z_grid, key.substream(3).child(ti as u64))?;
        let eh = evolve(&h, &slice)?;
        let eb = evolve(&b, &slice)?;

        // Increment processes from the left edge; their sup-distance is
        // invariant to which base point is used.
        let h0 = eh.value(0)?;
        let b0 = eb.value(0)?;
        let mut sup_diff: f64 = 0.0;
        for i in 0..x_grid.count() {
            sup_diff = sup_diff.max(((eh.value(i)? - h0) - (eb.value(i)? - b0)).abs());
        }

        let mu = cfg.mu_rule.mu(1.0, t, cfg.a);
        let sw = sandwich_event(&h, b.realized(), mu, cfg.a, &slice)?;

        out.push(TimeRep {
            sup_diff,
            exceed: sup_diff > threshold,
            exceed_wide: sup_diff > 8.0 * threshold,
            i_t: sw.i_t,
        });
    }
    Ok(out)
}

pub fn run(cfg: &ExperimentConfig, pool: &rayon::ThreadPool) -> Result<ExperimentReport> {
    if matches!(cfg.initial, InitialData::NarrowWedge) {
        return Err(crate::LabError::Config(
            "long-time-coupling needs initial data with finite increments".into(),
        ));
    }
    let reps = replicate(pool, cfg.replications, |r| one_rep(cfg, r))?;
    let n = reps.len();

    let mut checks = Vec::new();
    let mut observations = Vec::new();
    let mut freqs = Vec::new();
    let mut nesting_violations = 0usize;

    for (ti, &t) in cfg.t_list.iter().enumerate() {
        let held: Vec<bool> = reps.iter().map(|rep| rep[ti].exceed).collect();
        let (freq, se) = freq_se(&held);
        freqs.push((t, freq, se));
        observations.push(Observation::new(format!("t{t}_exceedance_frequency"), freq, Some(se), n));

        nesting_violations +=
            reps.iter().filter(|rep| rep[ti].exceed_wide && !rep[ti].exceed).count();

        let i_ts: Vec<f64> = reps.iter().map(|rep| rep[ti].i_t).collect();
        let (i_mean, i_se) = mean_se(&i_ts);
        let mu = cfg.mu_rule.mu(1.0, t, cfg.a);
        let target = 4.0 * mu * cfg.a;
        checks.push(check_le(
            format!("t{t}_i_t_gap"),
            (i_mean - target).abs(),
            2.0 * i_se,
            "mean coupling functional vs 4*mu*a",
        ));
        observations.push(Observation::new(format!("t{t}_i_t_mean"), i_mean, Some(i_se), n));
        observations.push(Observation::new(format!("t{t}_i_t_target"), target, None, n));
    }

    for w in freqs.windows(2) {
        let (ta, fa, sa) = w[0];
        let (tb, fb, sb) = w[1];
        checks.push(check_le(
            format!("exceedance_step_t{ta}_to_t{tb}"),
            fb - fa,
            2.0 * (sa * sa + sb * sb).sqrt(),
            "nonincreasing within two standard errors",
        ));
    }
    let first = freqs.first().expect("t list nonempty").1;
    let last = freqs.last().expect("t list nonempty").1;
    checks.push(check_le(
        "exceedance_final_minus_first",
        last - first,
        0.0,
        "memory loss accumulates over the full range",
    ));
    checks.push(check_le(
        "threshold_nesting_violations",
        nesting_violations as f64,
        0.0,
        "wider threshold can only be exceeded less often",
    ));

    let freq_points: Vec<(f64, f64)> = freqs.iter().map(|&(t, f, _)| (t, f)).collect();
    let plot = line_plot(
        "exceedance frequency vs t",
        &[Series { label: "P(sup > eta*sqrt(a))".into(), points: freq_points }],
    );

    let columns: Vec<String> = cfg
        .t_list
        .iter()
        .flat_map(|t| [format!("t{t}_sup_diff"), format!("t{t}_i_t")])
        .collect();
    let column_refs: Vec<&str> = columns.iter().map(String::as_str).collect();
    let rows: Vec<Vec<f64>> = reps
        .iter()
        .map(|rep| rep.iter().flat_map(|tr| [tr.sup_diff, tr.i_t]).collect())
        .collect();

    let artifacts = vec![
        write_artifact(&cfg.out_dir, "samples/coupling.csv", &samples_csv(&column_refs, &rows))?,
        write_artifact(&cfg.out_dir, "plots/exceedance.svg", &plot)?,
    ];

    Ok(ExperimentReport::new(cfg, checks, observations, artifacts))
}
