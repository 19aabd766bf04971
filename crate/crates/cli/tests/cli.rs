use std::path::PathBuf;
use std::process::{Command, Output};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../problems").join(name)
}

fn lyapdl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lyapdl"))
        .args(args)
        .env("LYAPDL_SEED", "7")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn derive_accepts_the_worked_instance() {
    let p = problem("worked.prob");
    let o = lyapdl(&["derive", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let s = stdout(&o);
    assert!(s.contains("p11 = 16.3"), "{s}");
    assert!(s.contains("verdict: member"));
}

#[test]
fn derive_names_failing_conjuncts() {
    let p = problem("unstable.prob");
    let o = lyapdl(&["derive", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL b < -p12"));
}

#[test]
fn unreadable_or_malformed_problems_exit_2() {
    let o = lyapdl(&["derive", "/nonexistent/problem"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.prob");
    std::fs::write(&bad, "params:\n  m = 1 +\n").unwrap();
    let o = lyapdl(&["prove", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn prove_emits_tree_and_smtlib() {
    let dir = tempfile::tempdir().unwrap();
    let tree = dir.path().join("tree.json");
    let smt = dir.path().join("smt");
    let p = problem("worked.prob");
    let o = lyapdl(&[
        "prove",
        p.to_str().unwrap(),
        "--emit-tree",
        tree.to_str().unwrap(),
        "--smtlib",
        smt.to_str().unwrap(),
        "--falsify",
        "50",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let s = stdout(&o);
    assert!(s.contains("0 open goals, complete"));
    assert!(s.contains("seed 7"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&tree).unwrap()).unwrap();
    assert_eq!(v["format"], 1);
    assert_eq!(v["complete"], true);
    let files = std::fs::read_dir(&smt).unwrap().count();
    assert_eq!(files, 7);
}

#[test]
fn part_one_hands_off_and_succeeds() {
    let p = problem("worked.prob");
    let o = lyapdl(&["prove", p.to_str().unwrap(), "--part", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("handed off"));
}

#[test]
fn printed_script_replays_through_the_cli() {
    let p = problem("worked.prob");
    let o = lyapdl(&["prove", p.to_str().unwrap(), "--part", "3", "--print-script"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let script: String = text
        .lines()
        .take_while(|l| !l.starts_with("part 3:"))
        .map(|l| format!("{l}\n"))
        .collect();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("part3.script");
    std::fs::write(&path, &script).unwrap();
    let o = lyapdl(&["prove", p.to_str().unwrap(), "--part", "3", "--script", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    // drop the last step: the part is left incomplete
    let truncated: String = script.lines().take(script.lines().count() - 1).map(|l| format!("{l}\n")).collect();
    std::fs::write(&path, truncated).unwrap();
    let o = lyapdl(&["prove", p.to_str().unwrap(), "--part", "3", "--script", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn unstable_proof_fails_with_step_and_conjuncts() {
    let p = problem("unstable.prob");
    let o = lyapdl(&["prove", p.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let s = stdout(&o);
    assert!(s.contains("replay failed: step "), "{s}");
    assert!(s.contains("b < -p12"));
}

#[test]
fn simulate_writes_both_csv_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = problem("worked.prob");
    let o = lyapdl(&[
        "simulate",
        p.to_str().unwrap(),
        "--x0",
        "-0.3,0.2",
        "--t-end",
        "2",
        "--grid",
        "-1:1:5,-2:2:3",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("t,theta,omega,V,Vdot"));
    assert_eq!(traj.lines().count(), 2002);
    let grid = std::fs::read_to_string(dir.path().join("grid.csv")).unwrap();
    assert_eq!(grid.lines().count(), 16);
}

#[test]
fn bad_grid_is_a_usage_error() {
    let p = problem("worked.prob");
    let o = lyapdl(&["simulate", p.to_str().unwrap(), "--grid", "1:0:3,0:1:2"]);
    assert_eq!(o.status.code(), Some(2));
}
