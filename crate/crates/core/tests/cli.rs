use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ctapf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctapf")).args(args).output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    for out in [&a, &b] {
        let o = ctapf(&["gen", "--seed", "7", "--width", "8", "--height", "8", "--density", "0.2", "--agents", "3", "--tasks", "2", "--out", s(out)]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
}

#[test]
fn solve_then_validate_the_corridor_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let scenario = fixture("corridor.json");
    let o = ctapf(&["solve", "--solver", "tcbs", "--in", s(&scenario), "--out", s(&sol)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for strict in [false, true] {
        let mut args = vec!["validate", "--scenario", s(&scenario), "--solution", s(&sol)];
        if strict {
            args.push("--strict");
        }
        let o = ctapf(&args);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
        assert_eq!(String::from_utf8_lossy(&o.stdout).trim(), "valid");
    }
}

#[test]
fn validate_rejects_a_corrupted_solution() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("sol.json");
    let scenario = fixture("corridor.json");
    assert!(ctapf(&["solve", "--in", s(&scenario), "--out", s(&sol)]).status.success());
    let mut json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    let cost = json["total_cost"].as_u64().unwrap();
    json["total_cost"] = (cost + 1).into();
    fs::write(&sol, json.to_string()).unwrap();
    let o = ctapf(&["validate", "--scenario", s(&scenario), "--solution", s(&sol)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("Cost"));
}

#[test]
fn usage_and_format_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ nope").unwrap();
    let out = dir.path().join("out.json");
    assert_eq!(ctapf(&["solve", "--in", s(&bad), "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(ctapf(&["solve", "--solver", "tpts", "--in", s(&bad), "--out", s(&out)]).status.code(), Some(2));
    assert_eq!(ctapf(&["frobnicate"]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(ctapf(&["solve", "--in", s(&missing), "--out", s(&out)]).status.code(), Some(2));
}

#[test]
fn infeasible_and_budget_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let walled = dir.path().join("walled.json");
    fs::write(
        &walled,
        r#"{"map": {"width": 3, "height": 1, "obstacles": [[1,0]]},
            "agents": [[0,0]], "tasks": [{"start": [2,0], "goal": [0,0]}]}"#,
    )
    .unwrap();
    let out = dir.path().join("out.json");
    let o = ctapf(&["solve", "--in", s(&walled), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!out.exists());

    let scenario = fixture("corridor.json");
    let o = ctapf(&["solve", "--in", s(&scenario), "--out", s(&out), "--node-budget", "1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn map_file_replaces_the_embedded_map() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("map.txt");
    fs::write(&map, "...\n.#.\n...\n").unwrap();
    let scenario = dir.path().join("s.json");
    fs::write(&scenario, r#"{"agents": [[0,0]], "tasks": [{"start": [2,0], "goal": [2,2]}]}"#).unwrap();
    let sol = dir.path().join("sol.json");
    let o = ctapf(&["solve", "--in", s(&scenario), "--out", s(&sol), "--map-file", s(&map)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(&sol).unwrap()).unwrap();
    assert_eq!(json["total_cost"], 4);
    let o = ctapf(&["validate", "--scenario", s(&scenario), "--solution", s(&sol), "--map-file", s(&map)]);
    assert_eq!(o.status.code(), Some(0));
    // Without the map file the scenario is incomplete.
    assert_eq!(ctapf(&["solve", "--in", s(&scenario), "--out", s(&sol)]).status.code(), Some(2));
}

#[test]
fn bench_writes_a_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("bench.csv");
    let o = ctapf(&["bench", "--tasks", "2", "--trials", "2", "--width", "5", "--height", "5", "--out", s(&csv)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 2 * 4);
    assert!(String::from_utf8_lossy(&o.stdout).contains("tcbs-nn2"));
}
