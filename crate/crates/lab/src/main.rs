//! Command line front end: sample kernels, evolve profiles, run the named
//! experiment scenarios, and summarize finished reports.
//!
//! Exit codes: 0 on success with all checks passing, 1 when an experiment
//! ran but a check failed, 2 on configuration or usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kpz_lab::config::{ExperimentConfig, OutputFormat};
use kpz_lab::formats::{profile_csv, slice_csv, write_artifact};
use kpz_lab::report::ExperimentReport;
use kpz_lab::scenarios::SCENARIOS;
use kpz_lab::{runner, LabError};

use kpz_lab_core::landscape::{sample_landscape_slice, ScalingParams};
use kpz_lab_core::rng::RngKey;
use kpz_lab_core::semigroup::evolve;

#[derive(Parser)]
#[command(name = "kpz-lab", about = "Simulation laboratory for a universal growth limit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Overrides {
    /// Flat key = value config file; flags override file values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed for all replication streams.
    #[arg(long)]
    seed: Option<u64>,
    /// Environment size parameter.
    #[arg(long)]
    n: Option<f64>,
    /// Spatial grid step.
    #[arg(long)]
    grid_step: Option<f64>,
    /// Half width of the sampled spatial window.
    #[arg(long)]
    halfwidth: Option<f64>,
    /// Monte Carlo replication count.
    #[arg(long)]
    replications: Option<usize>,
    /// Output directory for reports and samples.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores); never changes the numbers.
    #[arg(long)]
    threads: Option<usize>,
    /// Extra sample output format.
    #[arg(long, value_parser = ["json", "csv"])]
    format: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one kernel slice and write it as CSV.
    SampleLandscape {
        #[command(flatten)]
        overrides: Overrides,
        /// End time of the slice.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Evolve an initial condition through one sampled slice.
    Evolve {
        #[command(flatten)]
        overrides: Overrides,
        /// Initial condition: flat, narrow_wedge, brownian, or power:<z>.
        #[arg(long, default_value = "flat")]
        initial: String,
        /// End time of the evolution.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
    /// Run a named experiment scenario.
    Experiment {
        /// Scenario name; see list-scenarios.
        scenario: String,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Summarize the report in a finished output directory.
    Report { dir: PathBuf },
    /// List registered scenario names.
    ListScenarios,
}

fn apply_overrides(cfg: &mut ExperimentConfig, ov: &Overrides) -> Result<(), LabError> {
    if let Some(path) = &ov.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        cfg.apply_file_text(&text)?;
    }
    if let Some(seed) = ov.seed {
        cfg.master_seed = seed;
    }
    if let Some(n) = ov.n {
        cfg.n = n;
    }
    if let Some(step) = ov.grid_step {
        cfg.grid_step = step;
    }
    if let Some(half) = ov.halfwidth {
        cfg.z_halfwidth = half;
    }
    if let Some(reps) = ov.replications {
        cfg.replications = reps;
    }
    if let Some(out) = &ov.out {
        cfg.out_dir = out.clone();
    }
    if let Some(threads) = ov.threads {
        cfg.threads = threads;
    }
    if let Some(fmt) = &ov.format {
        cfg.format = Some(match fmt.as_str() {
            "csv" => OutputFormat::Csv,
            _ => OutputFormat::Json,
        });
    }
    cfg.validate()
}

fn sample_landscape_cmd(ov: &Overrides, t: f64) -> Result<(), LabError> {
    let mut cfg = ExperimentConfig::defaults("geometry")?;
    cfg.t = t;
    apply_overrides(&mut cfg, ov)?;
    let params = ScalingParams::new(cfg.n)?;
    let z_grid = kpz_lab::scenarios::symmetric_grid(cfg.z_halfwidth_at(cfg.t), cfg.grid_step)?;
    let x_grid = kpz_lab::scenarios::symmetric_grid(cfg.a, cfg.grid_step)?;
    let key = RngKey::new(cfg.master_seed);
    let slice = sample_landscape_slice(params, 0.0, cfg.t, &z_grid, &x_grid, key)?;
    let name = write_artifact(&cfg.out_dir, "slice.csv", &slice_csv(&slice))?;
    println!("wrote {}", cfg.out_dir.join(name).display());
    Ok(())
}

fn evolve_cmd(ov: &Overrides, initial: &str, t: f64) -> Result<(), LabError> {
    let mut cfg = ExperimentConfig::defaults("geometry")?;
    cfg.t = t;
    cfg.apply("initial", initial)?;
    apply_overrides(&mut cfg, ov)?;
    let params = ScalingParams::new(cfg.n)?;
    let z_grid = kpz_lab::scenarios::symmetric_grid(cfg.z_halfwidth_at(cfg.t), cfg.grid_step)?;
    let x_grid = kpz_lab::scenarios::symmetric_grid(cfg.a, cfg.grid_step)?;
    let key = RngKey::new(cfg.master_seed);
    let slice = sample_landscape_slice(params, 0.0, cfg.t, &z_grid, &x_grid, key.substream(1))?;
    let h = kpz_lab::scenarios::build_initial(cfg.initial, &z_grid, key.substream(2))?;
    let profile = evolve(&h, &slice)?;
    let name = write_artifact(&cfg.out_dir, "profile.csv", &profile_csv(&profile))?;
    println!("wrote {}", cfg.out_dir.join(name).display());
    Ok(())
}

fn experiment_cmd(scenario: &str, ov: &Overrides) -> Result<bool, LabError> {
    let mut cfg = ExperimentConfig::defaults(scenario)?;
    apply_overrides(&mut cfg, ov)?;
    let report = runner::run_experiment(&cfg)?;
    print!("{}", report.summary());
    println!("report: {}", cfg.out_dir.join("report.json").display());
    Ok(report.passed())
}

fn report_cmd(dir: &PathBuf) -> Result<bool, LabError> {
    let report = ExperimentReport::read(&dir.join("report.json"))?;
    print!("{}", report.summary());
    Ok(report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::SampleLandscape { overrides, t } => {
            sample_landscape_cmd(overrides, *t).map(|()| true)
        }
        Command::Evolve { overrides, initial, t } => {
            evolve_cmd(overrides, initial, *t).map(|()| true)
        }
        Command::Experiment { scenario, overrides } => experiment_cmd(scenario, overrides),
        Command::Report { dir } => report_cmd(dir),
        Command::ListScenarios => {
            for name in SCENARIOS {
                println!("{name}");
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(LabError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
