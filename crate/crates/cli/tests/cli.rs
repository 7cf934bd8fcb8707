use std::path::PathBuf;
use std::process::{Command, Output};

fn space(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("spaces").join(format!("{name}.json"))
}

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_opspace-lab"))
        .args(args)
        .env_remove("OPSPACE_LAB_SEED")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn classify_upper_triangular_with_search_passes() {
    let s = space("upper2");
    let out = lab(&["classify", "--space", s.to_str().unwrap(), "--v", "search"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["report"]["verdict"]["summary"], "unital operator algebra conditions satisfied");
    assert_eq!(v["closure"]["is_tro"], false);
    assert_eq!(v["adjoint_intersection_dim"], 2);
}

#[test]
fn check_conditions_on_column_space_fails_at_second_basis_vector() {
    let s = space("column21");
    let out = lab(&["check-conditions", "--space", s.to_str().unwrap(), "--v", "[[1],[0]]"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let r = v["condition_i"]["residual"].as_f64().unwrap();
    assert!((r - 0.5).abs() <= 1e-12);
    assert_eq!(v["condition_i"]["witness_index"], 1);
    assert_eq!(v["condition_i"]["status"], "fail");
}

#[test]
fn find_unit_on_column_space_reports_failure() {
    let s = space("column21");
    let out = lab(&["find-unit", "--space", s.to_str().unwrap(), "--restarts", "4"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    let f = v["unit"]["objective"].as_f64().unwrap();
    assert!((f - 0.25).abs() <= 1e-6, "{f}");
}

#[test]
fn usage_errors_exit_64() {
    let out = lab(&["report", "--space", "/definitely/missing.json"]);
    assert_eq!(out.status.code(), Some(64));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"name\": \"x\",\n  \"ambient\": \n").unwrap();
    let out = lab(&["report", "--space", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(64));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line") && err.contains("column"), "{err}");

    let s = space("upper2");
    let out = lab(&["report", "--space", s.to_str().unwrap(), "--v", "[[0,0],[1,0]]"]);
    assert_eq!(out.status.code(), Some(64));
    assert!(String::from_utf8_lossy(&out.stderr).contains("residual"));

    let out = lab(&["report", "--space", s.to_str().unwrap(), "--tol", "0"]);
    assert_eq!(out.status.code(), Some(64));
    let out = lab(&["report", "--space", s.to_str().unwrap(), "--n-max", "0"]);
    assert_eq!(out.status.code(), Some(64));
    let out = lab(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(64));
    let out = lab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn fixed_seed_gives_byte_identical_output() {
    let s = space("upper2");
    let args = [
        "report", "--space", s.to_str().unwrap(), "--trials", "50", "--n-max", "2", "--restarts", "4", "--steps", "40",
        "--seed", "17",
    ];
    let a = lab(&args);
    let b = lab(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    let c = Command::new(env!("CARGO_BIN_EXE_opspace-lab"))
        .args(&args[..args.len() - 2])
        .env("OPSPACE_LAB_SEED", "17")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn saved_reports_replay_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let s = space("upper2");
    let out = lab(&[
        "report", "--space", s.to_str().unwrap(), "--v", "[[1,0],[0,0]]", "--output", report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());

    let out = lab(&["report", "--replay", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    assert_eq!(v["max_deviation"].as_f64().unwrap(), 0.0);
    assert!(!v["entries"].as_array().unwrap().is_empty());

    let passing = dir.path().join("pass.json");
    let out = lab(&[
        "classify", "--space", s.to_str().unwrap(), "--v", "[[1,0],[0,1]]", "--trials", "20", "--n-max", "1",
        "--restarts", "2", "--steps", "20", "--output", passing.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let out = lab(&["report", "--replay", passing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}
