use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn ucrhn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ucrhn")).args(args).output().unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(format!("../../instances/fixtures/{name}.toml"))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Copy of the single-CHP fixture with its own heat-loss coefficient.
fn single_chp(dir: &Path, conductivity: f64) -> PathBuf {
    let text = std::fs::read_to_string(fixture("tiny-single-chp")).unwrap();
    let text = text.replace("conductivity = 40.0", &format!("conductivity = {conductivity:?}"));
    let path = dir.join(format!("single-{conductivity}.toml"));
    std::fs::write(&path, text).unwrap();
    path
}

fn solve_into(instance: &Path, out: &Path) -> Output {
    ucrhn(&["solve", "--instance", s(instance), "--backend", "enumerate", "--out", s(out)])
}

#[test]
fn unknown_flag_exits_one() {
    let out = ucrhn(&["solve", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(ucrhn(&["frobnicate"]).status.code(), Some(1));
}

#[test]
fn missing_instance_exits_one() {
    let out = ucrhn(&["export-mps", "--instance", "/nonexistent.toml", "--out", "/tmp/x.mps"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn solve_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let r = solve_into(&fixture("tiny-reconfig"), &out);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    for f in ["model.mps", "solution.json", "report.txt", "report.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    for f in ["generation.csv", "heat.csv", "valves.csv", "curtailment.csv"] {
        let text = std::fs::read_to_string(out.join(f)).unwrap();
        assert_eq!(text.lines().count(), 2, "{f}");
        assert!(text.starts_with("period,"));
    }
    let report = std::fs::read_to_string(out.join("report.txt")).unwrap();
    assert!(report.contains("open   P23"));
    assert!(report.contains("close  P43"));
    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(json["status"], "optimal");
}

#[test]
fn export_matches_the_solved_model() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    solve_into(&fixture("tiny-network"), &run);
    let mps = dir.path().join("m.mps");
    let r = ucrhn(&["export-mps", "--instance", s(&fixture("tiny-network")), "--out", s(&mps)]);
    assert_eq!(r.status.code(), Some(0));
    assert_eq!(std::fs::read(&mps).unwrap(), std::fs::read(run.join("model.mps")).unwrap());
}

#[test]
fn infeasible_instance_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("tiny-single-chp")).unwrap();
    let path = dir.path().join("starved.toml");
    std::fs::write(&path, text.replace("H1 = [10.0, 6.0]", "H1 = [100.0, 100.0]")).unwrap();
    let r = solve_into(&path, &dir.path().join("run"));
    assert_eq!(r.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&r.stdout).contains("Infeasible"));
}

#[test]
fn loss_free_verification_passes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = single_chp(dir.path(), 0.0);
    let run = dir.path().join("run");
    assert_eq!(solve_into(&inst, &run).status.code(), Some(0));
    let sol = run.join("solution.json");
    let r = ucrhn(&["verify", "--instance", s(&inst), "--solution", s(&sol), "--periods", "1,2"]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = String::from_utf8(r.stdout).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 2);
    for row in rows {
        let err: f64 = row.rsplit(',').next().unwrap().parse().unwrap();
        assert!(err < 1e-9, "{row}");
    }
}

#[test]
fn zero_tolerance_on_a_lossy_network_fails() {
    let dir = tempfile::tempdir().unwrap();
    let inst = single_chp(dir.path(), 40.0);
    let run = dir.path().join("run");
    solve_into(&inst, &run);
    let sol = run.join("solution.json");
    let args = ["verify", "--instance", s(&inst), "--solution", s(&sol), "--periods", "1,2"];
    let strict: Vec<&str> = args.iter().copied().chain(["--tol", "0"]).collect();
    assert_eq!(ucrhn(&strict).status.code(), Some(2));
    assert_eq!(ucrhn(&args).status.code(), Some(0));
}

#[test]
fn verification_is_reproducible_from_the_saved_solution() {
    let dir = tempfile::tempdir().unwrap();
    let inst = single_chp(dir.path(), 40.0);
    let run = dir.path().join("run");
    solve_into(&inst, &run);
    let sol = run.join("solution.json");
    let args = ["verify", "--instance", s(&inst), "--solution", s(&sol), "--periods", "2,1"];
    let a = ucrhn(&args);
    let b = ucrhn(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.stderr, b.stderr);
    // Periods are reported in the order requested.
    let csv = String::from_utf8(a.stdout).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("2,"));
}

#[test]
fn out_of_range_period_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let inst = single_chp(dir.path(), 40.0);
    let run = dir.path().join("run");
    solve_into(&inst, &run);
    let sol = run.join("solution.json");
    let r = ucrhn(&["verify", "--instance", s(&inst), "--solution", s(&sol), "--periods", "3"]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn sweep_prints_both_variants_per_value() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("sweep.csv");
    let r = ucrhn(&[
        "sweep",
        "--instance",
        s(&fixture("tiny-reconfig")),
        "--param",
        "line-capacity",
        "--line",
        "none",
        "--values",
        "10",
        "--backend",
        "enumerate",
    ]);
    assert_eq!(r.status.code(), Some(1), "unknown line");
    let net = fixture("tiny-network");
    let text = std::fs::read_to_string(&net).unwrap();
    let line = text
        .lines()
        .skip_while(|l| !l.starts_with("[[power.lines]]"))
        .find_map(|l| l.strip_prefix("id = \""))
        .unwrap()
        .trim_end_matches('"')
        .to_string();
    let r = ucrhn(&[
        "sweep", "--instance", s(&net), "--param", "line-capacity", "--line", &line, "--values", "100,5",
        "--backend", "enumerate", "--out", s(&table),
    ]);
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    let csv = std::fs::read_to_string(&table).unwrap();
    assert_eq!(csv, String::from_utf8(r.stdout).unwrap());
    let rows: Vec<&str> = csv.lines().collect();
    assert!(rows[0].starts_with("capacity_mw,variant,status,max_shed_mw,total_cost"));
    assert_eq!(rows.len(), 5);
    assert!(rows[1].starts_with("100,fixed,") && rows[2].starts_with("100,reconfigurable,"));
}
