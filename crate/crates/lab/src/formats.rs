//! Plain-text serialization of slices, profiles, and sample batches.
//!
//! Everything is comma-separated with a `.` decimal point and `-inf`
//! markers for minus infinity; floats print in Rust's shortest-roundtrip
//! form, so files are deterministic and loadable without binary readers.

use std::path::Path;

use kpz_lab_core::grid::Grid;
use kpz_lab_core::landscape::LandscapeSlice;
use kpz_lab_core::semigroup::EvolvedProfile;

use crate::Result;

fn fmt_value(v: f64) -> String {
    if v == f64::NEG_INFINITY {
        "-inf".to_string()
    } else {
        format!("{v}")
    }
}

fn grid_comment(tag: &str, grid: &Grid) -> String {
    format!(
        "# {tag}_grid: origin = {}, step = {}, count = {}\n",
        grid.origin(),
        grid.step(),
        grid.count()
    )
}

/// Renders a slice as CSV: metadata comments, then one row per
/// (z_index, x_index) pair.
pub fn slice_csv(slice: &LandscapeSlice) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "# n = {}, s = {}, t = {}\n",
        slice.params().n(),
        slice.s(),
        slice.t()
    ));
    out.push_str(&grid_comment("z", slice.z_grid()));
    out.push_str(&grid_comment("x", slice.x_grid()));
    out.push_str("z_index,x_index,value\n");
    for (zi, row) in slice.values().iter().enumerate() {
        for (xi, v) in row.iter().enumerate() {
            out.push_str(&format!("{zi},{xi},{}\n", fmt_value(*v)));
        }
    }
    out
}

/// Renders an evolved profile as CSV: one row per output point with the
/// argmax coordinate that produced it.
pub fn profile_csv(profile: &EvolvedProfile) -> String {
    let mut out = String::new();
    out.push_str(&format!("# t = {}\n", profile.t()));
    out.push_str(&grid_comment("x", profile.x_grid()));
    out.push_str("x,h_t,argmax_z\n");
    for i in 0..profile.x_grid().count() {
        let x = profile.x_grid().point(i).expect("index in range");
        let v = profile.value(i).expect("profile is finite");
        let z = profile.argmax_coordinate(i).expect("index in range");
        out.push_str(&format!("{x},{v},{z}\n"));
    }
    out
}

/// Writes a rectangular batch of samples: `columns` names the header, each
/// row is one replication.
pub fn samples_csv(columns: &[&str], rows: &[Vec<f64>]) -> String {
    let mut out = String::new();
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        let cells: Vec<String> = row.iter().map(|v| fmt_value(*v)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Writes text to `dir/name` (creating intermediate directories, so names
/// like `samples/x.csv` work) and returns `name` for the artifact list.
pub fn write_artifact(dir: &Path, name: &str, text: &str) -> Result<String> {
    let path = dir.join(name);
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(&path, text)?;
    Ok(name.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use kpz_lab_core::grid::make_grid;
    use kpz_lab_core::landscape::{sample_landscape_slice, ScalingParams};
    use kpz_lab_core::rng::RngKey;
    use kpz_lab_core::semigroup::{evolve, make_initial, InitialKind};

    #[test]
    fn slice_csv_has_header_rows_and_inf_markers() {
        let params = ScalingParams::new(8.0).unwrap();
        let z = make_grid(-0.2, 0.1, 5).unwrap();
        let x = make_grid(-0.2, 0.1, 5).unwrap();
        let slice = sample_landscape_slice(params, 0.0, 1.0, &z, &x, RngKey::new(1)).unwrap();
        let text = slice_csv(&slice);
        assert!(text.contains("# n = 8, s = 0, t = 1"));
        assert!(text.contains("z_index,x_index,value"));
        let rows = text.lines().filter(|l| !l.starts_with('#')).count();
        assert_eq!(rows, 1 + 25);
        // wide-z against narrow-x windows leave inadmissible corners
        if slice.values().iter().flatten().any(|v| *v == f64::NEG_INFINITY) {
            assert!(text.contains("-inf"));
        }
    }

    #[test]
    fn profile_csv_lists_argmax_coordinates() {
        let params = ScalingParams::new(8.0).unwrap();
        let z = make_grid(-0.2, 0.1, 5).unwrap();
        let x = make_grid(-0.2, 0.1, 5).unwrap();
        let slice = sample_landscape_slice(params, 0.0, 1.0, &z, &x, RngKey::new(2)).unwrap();
        let flat = make_initial(InitialKind::Flat, slice.z_grid()).unwrap();
        let profile = evolve(&flat, &slice).unwrap();
        let text = profile_csv(&profile);
        assert!(text.contains("x,h_t,argmax_z"));
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 1 + 5);
    }

    #[test]
    fn samples_csv_is_rectangular() {
        let text = samples_csv(&["a", "b"], &[vec![1.0, 2.0], vec![f64::NEG_INFINITY, 0.5]]);
        assert_eq!(text, "a,b\n1,2\n-inf,0.5\n");
    }
}
