use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shellspec")).args(args).env_remove("SHELLSPEC_THREADS").output().expect("binary runs")
}

#[test]
fn help_and_version_succeed() {
    assert!(run(&["--help"]).status.success());
    assert!(run(&["capacity", "--help"]).status.success());
}

#[test]
fn invalid_input_exits_with_one() {
    for args in [
        &["mesh", "--shape", "torus:1:2"][..],
        &["capacity", "--shape", "icosphere:1:2", "--m", "-1"],
        &["verify", "--shape", "icosphere:1:1", "--a", "3"],
        &["capacity", "--bogus"],
        &["capacity", "--shape", "icosphere:1:1", "--threads", "0"],
        &["curves", "--shape", "icosphere:1:1", "--a-grid", "-2:2:5"],
    ] {
        assert_eq!(run(args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn bad_thread_variable_is_a_validation_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_shellspec"))
        .args(["mesh", "--shape", "icosphere:1:1"])
        .env("SHELLSPEC_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn capacity_report_is_json_on_stdout() {
    let out = run(&["capacity", "--shape", "icosphere:1:1"]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["command"], "capacity");
}

#[test]
fn sweep_tolerates_failing_shapes() {
    let out = run(&["sweep", "--shapes", "icosphere:1:1;torus:1:1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(run(&["sweep", "--shapes", "torus:1:1"]).status.code(), Some(1));
}

#[test]
fn config_file_is_read_and_unknown_keys_rejected() {
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR"));
    let good = dir.join("cli-good.json");
    std::fs::write(&good, r#"{"shape": "icosphere:1:1", "m": 2.0}"#).unwrap();
    let out = run(&["capacity", "--config", good.to_str().unwrap()]);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["config"]["m"].as_f64(), Some(2.0));
    let bad = dir.join("cli-bad.json");
    std::fs::write(&bad, r#"{"shape": "icosphere:1:1", "mass": 2.0}"#).unwrap();
    assert_eq!(run(&["capacity", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}
