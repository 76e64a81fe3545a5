//! Experiment reports: named checks with pinned thresholds, raw
//! observations, and artifact lists.
//!
//! `report.json` is a pure function of (config, master_seed): wall-clock
//! timing goes to a `timing.json` sidecar so the report stays byte-identical
//! across re-runs and thread counts.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::Result;

/// One gated quantity. `passed` encodes the comparison direction, which
/// varies per check; `note` says what the threshold means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub name: String,
    pub observed: f64,
    pub threshold: f64,
    pub passed: bool,
    pub note: String,
}

/// Upper-bounded check: passes when `observed <= threshold`.
pub fn check_le(name: impl Into<String>, observed: f64, threshold: f64, note: impl Into<String>) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        observed,
        threshold,
        passed: observed <= threshold,
        note: note.into(),
    }
}

/// Lower-bounded check: passes when `observed >= threshold`.
pub fn check_ge(name: impl Into<String>, observed: f64, threshold: f64, note: impl Into<String>) -> CheckRecord {
    CheckRecord {
        name: name.into(),
        observed,
        threshold,
        passed: observed >= threshold,
        note: note.into(),
    }
}

/// Band check, emitted as a lower and an upper record.
pub fn check_band(
    name: impl Into<String>,
    observed: f64,
    lo: f64,
    hi: f64,
    note: &str,
) -> [CheckRecord; 2] {
    let name = name.into();
    [
        check_ge(format!("{name}.lower"), observed, lo, note.to_string()),
        check_le(format!("{name}.upper"), observed, hi, note.to_string()),
    ]
}

/// An ungated estimate recorded for the report reader.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub name: String,
    pub value: f64,
    pub stderr: Option<f64>,
    pub n: usize,
}

impl Observation {
    pub fn new(name: impl Into<String>, value: f64, stderr: Option<f64>, n: usize) -> Self {
        Self { name: name.into(), value, stderr, n }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub scenario: String,
    pub config: ExperimentConfig,
    /// Master seed; per-replication keys derive from it as
    /// (master_seed, replication, purpose).
    pub seed_record: u64,
    pub checks: Vec<CheckRecord>,
    pub observations: Vec<Observation>,
    /// File names relative to the report directory, sorted.
    pub artifacts: Vec<String>,
    /// Where the wall-clock measurement lives.
    pub timing_file: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct Timing {
    wall_clock_seconds: f64,
}

impl ExperimentReport {
    pub fn new(
        config: &ExperimentConfig,
        checks: Vec<CheckRecord>,
        observations: Vec<Observation>,
        mut artifacts: Vec<String>,
    ) -> Self {
        artifacts.sort();
        Self {
            scenario: config.scenario.clone(),
            config: config.clone(),
            seed_record: config.master_seed,
            checks,
            observations,
            artifacts,
            timing_file: "timing.json".to_string(),
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.passed)
    }

    /// Writes `report.json` and the timing sidecar; returns the report path.
    pub fn write(&self, dir: &Path, elapsed: Duration) -> Result<PathBuf> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join("report.json");
        let mut body = serde_json::to_string_pretty(self)?;
        body.push('\n');
        std::fs::write(&path, body)?;
        let timing = Timing { wall_clock_seconds: elapsed.as_secs_f64() };
        let mut tbody = serde_json::to_string_pretty(&timing)?;
        tbody.push('\n');
        std::fs::write(dir.join(&self.timing_file), tbody)?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    /// One-line-per-check text summary for the terminal.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "scenario {} seed {} ({} checks, {} observations)\n",
            self.scenario,
            self.seed_record,
            self.checks.len(),
            self.observations.len()
        ));
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {}: observed {:.6e} vs {:.6e} ({})\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.observed,
                c.threshold,
                c.note
            ));
        }
        out.push_str(if self.passed() { "overall: PASS\n" } else { "overall: FAIL\n" });
        out
    }
}

/// Mean and standard error of a batch.
pub fn mean_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Empirical frequency of a boolean sequence with its binomial standard error.
pub fn freq_se(hits: &[bool]) -> (f64, f64) {
    let n = hits.len() as f64;
    let p = hits.iter().filter(|h| **h).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

/// Sample correlation coefficient.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
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
