//! End-to-end checks of the binary: exit codes, determinism across runs,
//! config file parsing, and the report summarizer.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_kpz-lab"))
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kpz-lab-cli-{}-{tag}", std::process::id()));
    if dir.exists() {
        std::fs::remove_dir_all(&dir).expect("clear stale scratch dir");
    }
    dir
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// Small, fast, and exact: the geometry suite at reduced size.
fn small_geometry(out: &PathBuf, seed: &str) -> Output {
    bin()
        .args(["experiment", "geometry", "--seed", seed, "--n", "20"])
        .args(["--replications", "40", "--out"])
        .arg(out)
        .output()
        .expect("spawn kpz-lab")
}

#[test]
fn same_seed_twice_is_byte_identical() {
    let a = scratch("det-a");
    let b = scratch("det-b");
    assert_eq!(small_geometry(&a, "7").status.code(), Some(0));
    assert_eq!(small_geometry(&b, "7").status.code(), Some(0));
    let ra = std::fs::read(a.join("report.json")).unwrap();
    let rb = std::fs::read(b.join("report.json")).unwrap();
    assert_eq!(ra, rb, "same config and seed must reproduce the report byte for byte");

    let c = scratch("det-c");
    assert_eq!(small_geometry(&c, "8").status.code(), Some(0));
    let rc = std::fs::read(c.join("report.json")).unwrap();
    assert_ne!(ra, rc, "a different seed must actually change the samples");
}

#[test]
fn unknown_scenario_is_a_usage_error() {
    let out = bin().args(["experiment", "no-such-scenario"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("no-such-scenario"), "stderr names the offender: {err}");
}

#[test]
fn malformed_config_file_is_a_usage_error() {
    let dir = scratch("badcfg");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("bad.conf");
    std::fs::write(&cfg, "replications = banana\n").unwrap();
    let out = bin()
        .args(["experiment", "geometry", "--config"])
        .arg(&cfg)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("config error"));
}

#[test]
fn invalid_flag_value_is_a_usage_error() {
    let out = bin()
        .args(["experiment", "geometry", "--grid-step", "0", "--replications", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn list_scenarios_names_every_registered_scenario() {
    let out = bin().arg("list-scenarios").output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    for name in [
        "geometry",
        "local-brownian",
        "airy-sheet",
        "long-time-coupling",
        "invariance-123",
        "argmax-uniqueness",
    ] {
        assert!(text.lines().any(|l| l.trim() == name), "missing scenario {name}: {text}");
    }
}

#[test]
fn report_command_summarizes_a_finished_directory() {
    let dir = scratch("report");
    assert_eq!(small_geometry(&dir, "7").status.code(), Some(0));
    let out = bin().arg("report").arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("geometry"), "summary names the scenario: {text}");
    assert!(text.contains("overall: PASS"), "summary ends with the verdict: {text}");
    assert!(text.contains("[PASS]"), "summary lists per-check lines: {text}");
}

#[test]
fn failed_checks_exit_one() {
    // A narrow wedge over a short horizon with the local-limit drift: the
    // comparison event frequency sits far below its 0.9 gate there, so the
    // run finishes cleanly but the report fails.
    let dir = scratch("fail");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("wedge-short.conf");
    std::fs::write(
        &cfg,
        "initial = narrow_wedge\nn = 25\nt = 1\ngrid_step = 0.1\nz_halfwidth = 3\n\
         a = 1\nepsilon_list = 0.1\noffsets = 0.5, 1\nmu_rule = eps_power\n\
         replications = 40\nmaster_seed = 2\n",
    )
    .unwrap();
    let out = bin()
        .args(["experiment", "local-brownian", "--config"])
        .arg(&cfg)
        .args(["--out"])
        .arg(dir.join("run"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout_of(&out).contains("[FAIL]"));
}

#[test]
fn config_file_with_comments_round_trips_into_the_report() {
    let dir = scratch("cfgfile");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("geom.conf");
    std::fs::write(
        &cfg,
        "# exactness suite at desk scale\nn = 20\ngrid_step = 0.1\n\nreplications = 30\nmaster_seed = 5\n",
    )
    .unwrap();
    let run = dir.join("run");
    let out = bin()
        .args(["experiment", "geometry", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&run)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let body: serde_json::Value =
        serde_json::from_slice(&std::fs::read(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(body["scenario"], "geometry");
    assert_eq!(body["config"]["n"], 20.0);
    assert_eq!(body["config"]["replications"], 30);
    assert_eq!(body["seed_record"], 5);
}

#[test]
fn flags_override_config_file_values() {
    let dir = scratch("override");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("geom.conf");
    std::fs::write(&cfg, "n = 20\nreplications = 30\nmaster_seed = 5\n").unwrap();
    let run = dir.join("run");
    let out = bin()
        .args(["experiment", "geometry", "--config"])
        .arg(&cfg)
        .args(["--seed", "11", "--replications", "25", "--out"])
        .arg(&run)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let body: serde_json::Value =
        serde_json::from_slice(&std::fs::read(run.join("report.json")).unwrap()).unwrap();
    assert_eq!(body["config"]["replications"], 25);
    assert_eq!(body["seed_record"], 11);
}
