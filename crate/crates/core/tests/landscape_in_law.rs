//! Distributional checks on the sampled landscape, at fixed seeds.
//!
//! These gates are statistical but deterministic: the seeds are pinned, so
//! a verdict flip means the sampler changed, not that the dice rolled badly.

use kpz_lab_core::grid::make_grid;
use kpz_lab_core::landscape::{
    airy_sheet, disjoint_time_slices, sample_landscape_slice, ScalingParams,
};
use kpz_lab_core::rng::RngKey;
use kpz_lab_core::stats::{ks_two_sample, SampleSet};

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let (ma, mb) = (
        a.iter().sum::<f64>() / n,
        b.iter().sum::<f64>() / n,
    );
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va * vb).sqrt()
}

#[test]
fn disjoint_time_slices_are_uncorrelated() {
    let params = ScalingParams::new(32.0).unwrap();
    let z_grid = make_grid(-0.1, 0.1, 3).unwrap();
    let x_grid = make_grid(-0.1, 0.1, 3).unwrap();
    let key = RngKey::new(101);
    let reps = 1000;
    let mut first = Vec::with_capacity(reps);
    let mut second = Vec::with_capacity(reps);
    for r in 0..reps {
        let slices = disjoint_time_slices(
            params,
            &[(0.0, 0.5), (0.5, 1.0)],
            &z_grid,
            &x_grid,
            key.stream(r as u64),
        )
        .unwrap();
        first.push(slices[0].value(1, 1).unwrap());
        second.push(slices[1].value(1, 1).unwrap());
    }
    let rho = correlation(&first, &second);
    let bound = 3.0 / (reps as f64).sqrt();
    assert!(rho.abs() < bound, "correlation {rho} exceeds {bound}");
}

#[test]
fn rescaling_arithmetic_is_consistent_across_n_and_t() {
    // scaling time by gamma^-3 = 1/8 and space windows by gamma^-2 = 1/4
    // turns one construction into the other line by line, so values agree
    // in law after multiplying by gamma = 2, at any grid resolution
    let z_coarse = make_grid(-0.05, 0.05, 3).unwrap();
    let x_coarse = make_grid(-0.05, 0.05, 3).unwrap();
    let z_fine = make_grid(-0.0125, 0.0125, 3).unwrap();
    let x_fine = make_grid(-0.0125, 0.0125, 3).unwrap();
    let key = RngKey::new(202);
    let reps = 600;
    let coarse = ScalingParams::new(64.0).unwrap();
    let fine = ScalingParams::new(512.0).unwrap();
    let mut a = Vec::with_capacity(reps);
    let mut b = Vec::with_capacity(reps);
    for r in 0..reps {
        let sa = sample_landscape_slice(
            coarse, 0.0, 1.0, &z_coarse, &x_coarse, key.stream(r as u64).substream(1),
        )
        .unwrap();
        a.push(sa.value(1, 1).unwrap());
        let sb = sample_landscape_slice(
            fine, 0.0, 0.125, &z_fine, &x_fine, key.stream(r as u64).substream(2),
        )
        .unwrap();
        b.push(2.0 * sb.value(1, 1).unwrap());
    }
    let d = ks_two_sample(
        &SampleSet::new(a, "unit time", key).unwrap(),
        &SampleSet::new(b, "eighth time, doubled", key).unwrap(),
    )
    .unwrap();
    assert!(d < 0.1, "ks {d}");
}

#[test]
fn sheet_is_stationary_along_the_diagonal() {
    let params = ScalingParams::new(64.0).unwrap();
    let z_grid = make_grid(-0.15, 0.075, 5).unwrap();
    let x_grid = make_grid(-0.15, 0.075, 5).unwrap();
    let key = RngKey::new(303);
    let reps = 800;
    let mut low = Vec::with_capacity(reps);
    let mut high = Vec::with_capacity(reps);
    let mut low_off = Vec::with_capacity(reps);
    let mut high_off = Vec::with_capacity(reps);
    for r in 0..reps {
        let slice =
            sample_landscape_slice(params, 0.0, 1.0, &z_grid, &x_grid, key.stream(r as u64))
                .unwrap();
        let sheet = airy_sheet(&slice).unwrap().sheet;
        low.push(sheet[0][0]);
        high.push(sheet[4][4]);
        low_off.push(sheet[0][2]);
        high_off.push(sheet[2][4]);
    }
    let mk = |v: Vec<f64>, tag: &str| SampleSet::new(v, tag, key).unwrap();
    let d0 = ks_two_sample(&mk(low, "diag low"), &mk(high, "diag high")).unwrap();
    assert!(d0 < 0.08, "diagonal ks {d0}");
    let d1 = ks_two_sample(&mk(low_off, "offset low"), &mk(high_off, "offset high")).unwrap();
    assert!(d1 < 0.08, "offset ks {d1}");
}
