//! Exit codes and output files of the command-line front end.

use std::fs;
use std::process::Command;

fn hcssa() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hcssa"))
}

#[test]
fn small_run_succeeds_and_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("res");
    let st = hcssa()
        .args(["run", "--sweep", "power=20,40", "--schemes", "is,zf,mrc", "--trials", "2", "--seed", "3", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(st.code(), Some(0));
    for f in ["aggregate.csv", "trials.csv", "metadata.json"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    assert_eq!(fs::read_to_string(out.join("aggregate.csv")).unwrap().lines().count(), 1 + 2 * 3);
}

#[test]
fn bad_sweep_is_a_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    for sweep in ["volume=1,2", "power", "power=a,b"] {
        let st = hcssa().args(["run", "--sweep", sweep, "--out"]).arg(dir.path().join("x")).status().unwrap();
        assert_eq!(st.code(), Some(1), "{sweep}");
    }
    let st = hcssa().args(["run", "--sweep", "power=20", "--schemes", "nope", "--out"]).arg(dir.path().join("y")).status().unwrap();
    assert_eq!(st.code(), Some(1));
}

#[test]
fn unwritable_output_fails_before_computing() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("plain");
    fs::write(&file, "x").unwrap();
    let st = hcssa().args(["run", "--sweep", "power=20", "--trials", "1", "--out"]).arg(file.join("sub")).status().unwrap();
    assert_eq!(st.code(), Some(1));
}

#[test]
fn bad_config_file_and_arguments_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "[scenario]\nunknown_field = 2\n").unwrap();
    let st = hcssa().args(["trial", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("t")).status().unwrap();
    assert_eq!(st.code(), Some(1));
    assert_eq!(hcssa().args(["run", "--bogus"]).status().unwrap().code(), Some(1));
    assert_eq!(hcssa().arg("--help").output().unwrap().status.code(), Some(0));
}

#[test]
fn trial_writes_summary_traces_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let st = hcssa().args(["trial", "--schemes", "is,mrc", "--seed", "5", "--trial", "1", "--out"]).arg(&out).status().unwrap();
    assert_eq!(st.code(), Some(0));
    assert!(out.join("trial.json").is_file());
    assert!(out.join("metadata.json").is_file());
    assert!(out.join("is_hcssa_trace.csv").is_file());
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("trial.json")).unwrap()).unwrap();
    assert_eq!(summary.as_array().unwrap().len(), 2);
}
