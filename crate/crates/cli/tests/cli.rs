use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const SCENARIOS: [&str; 7] = [
    "availability_cost",
    "ds_outage_backup",
    "ds_outage_no_backup",
    "late_backup",
    "load_balance",
    "optional_outage",
    "telemedicine",
];

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn scenario(name: &str) -> PathBuf {
    root().join("scenarios").join(format!("{name}.toml"))
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn renet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_renet"))
        .args(args)
        .env_remove("RENET_SEED")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn dot(args: &[&str]) -> String {
    let o = renet(&[&["export-dot"], args].concat());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    stdout(&o)
}

#[test]
fn run_exit_codes_follow_outcome() {
    let ok = renet(&["run", "--scenario", scenario("telemedicine").to_str().unwrap()]);
    assert_eq!(ok.status.code(), Some(0));
    let terminated = renet(&["run", "--scenario", scenario("ds_outage_no_backup").to_str().unwrap()]);
    assert_eq!(terminated.status.code(), Some(2));
    assert!(stdout(&terminated).ends_with("Terminated\theartbeat-exhausted:DS:3\n"));
}

#[test]
fn malformed_scenarios_fail_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "horizon = 0\n").unwrap();
    for cmd in ["run", "validate"] {
        let o = renet(&[cmd, "--scenario", bad.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(1));
        let err = String::from_utf8_lossy(&o.stderr);
        assert!(err.contains("line 1"), "{err}");
    }
    let missing = renet(&["run", "--scenario", dir.path().join("nope.toml").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());
}

#[test]
fn traces_match_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    for name in SCENARIOS {
        let out = dir.path().join(format!("{name}.trace"));
        renet(&["run", "--scenario", scenario(name).to_str().unwrap(), "--out", out.to_str().unwrap()]);
        let want = fs::read_to_string(golden(&format!("{name}.trace"))).unwrap();
        assert_eq!(fs::read_to_string(&out).unwrap(), want, "{name}");
    }
}

#[test]
fn matrix_matches_golden_table() {
    let o = renet(&[
        "matrix",
        "--scenario",
        scenario("ds_outage_backup").to_str().unwrap(),
        "--service",
        "DS",
        "--tick",
        "3",
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), fs::read_to_string(golden("ds_outage_matrix.txt")).unwrap());
    let none = renet(&[
        "matrix",
        "--scenario",
        scenario("ds_outage_backup").to_str().unwrap(),
        "--service",
        "DS",
        "--tick",
        "2",
    ]);
    assert_eq!(none.status.code(), Some(1));
}

#[test]
fn json_trace_lists_every_event() {
    let o = renet(&["run", "--scenario", scenario("ds_outage_backup").to_str().unwrap(), "--format", "json"]);
    let events: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let golden = fs::read_to_string(golden("ds_outage_backup.trace")).unwrap();
    let events = events.as_array().unwrap();
    assert_eq!(events.len(), golden.lines().count());
    assert_eq!(events.last().unwrap()["kind"], "Completed");
}

#[test]
fn handling_net_dot_shape() {
    let s = scenario("ds_outage_backup");
    let nf = dot(&["--scenario", s.to_str().unwrap(), "--what", "pnh-nf", "--service", "DS"]);
    assert_eq!(nf.matches("shape=circle").count(), 5);
    assert_eq!(nf.matches("shape=box").count(), 4);
    assert!(nf.starts_with("digraph \"pnh-nf:DS\" {"));
    let f = dot(&["--scenario", s.to_str().unwrap(), "--what", "pnh-f", "--service", "DS"]);
    assert_eq!(f.matches("shape=circle").count(), 13);
    assert_eq!(f.matches("shape=box").count(), 12);
    // after the outage one token sits in the availability postcondition
    let after = dot(&["--scenario", s.to_str().unwrap(), "--what", "pnh-nf", "--service", "DS", "--tick", "3"]);
    assert_ne!(after, nf);
    assert!(after.contains("\\n3\""));
}

#[test]
fn composition_dot_per_configuration() {
    let s = scenario("ds_outage_backup");
    let c0 = dot(&["--scenario", s.to_str().unwrap(), "--what", "pnac@DTE_0"]);
    let c1 = dot(&["--scenario", s.to_str().unwrap(), "--what", "pnac@DTE_1"]);
    assert!(c0.contains("\"m:DS\""));
    assert!(!c1.contains("\"m:DS\""));
    assert!(c1.contains("\"m:DS'\""));
    let missing = renet(&["export-dot", "--scenario", s.to_str().unwrap(), "--what", "pnac@DTE_9"]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn replay_accepts_and_rejects() {
    let s = scenario("late_backup");
    let ok = renet(&["replay", "--scenario", s.to_str().unwrap(), "--trace", golden("late_backup.trace").to_str().unwrap()]);
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
    let dir = tempfile::tempdir().unwrap();
    let tampered = dir.path().join("t.trace");
    let text = fs::read_to_string(golden("late_backup.trace")).unwrap().replace("DTE_2", "DTE_3");
    fs::write(&tampered, text).unwrap();
    let bad = renet(&["replay", "--scenario", s.to_str().unwrap(), "--trace", tampered.to_str().unwrap()]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(format!("{}{}", stdout(&bad), String::from_utf8_lossy(&bad.stderr)).contains("differ at line"));
}

#[test]
fn seed_override_changes_load_balancing() {
    let s = scenario("load_balance");
    let default = renet(&["run", "--scenario", s.to_str().unwrap()]);
    let reseeded = Command::new(env!("CARGO_BIN_EXE_renet"))
        .args(["run", "--scenario", s.to_str().unwrap()])
        .env("RENET_SEED", "0")
        .output()
        .unwrap();
    assert!(stdout(&default).contains("step=3-doctor service=DS2"));
    assert!(stdout(&reseeded).contains("step=3-doctor service=DS "));
    assert!(stdout(&reseeded).starts_with("0\tStarted\tseed=0\n"));
    let junk = Command::new(env!("CARGO_BIN_EXE_renet"))
        .args(["run", "--scenario", s.to_str().unwrap()])
        .env("RENET_SEED", "many")
        .output()
        .unwrap();
    assert_eq!(junk.status.code(), Some(1));
}

#[test]
fn validate_agrees_with_run() {
    for name in SCENARIOS {
        let v = renet(&["validate", "--scenario", scenario(name).to_str().unwrap()]);
        assert!(v.status.success(), "{name}");
        assert!(stdout(&v).starts_with("ok: "));
        let r = renet(&["run", "--scenario", scenario(name).to_str().unwrap()]);
        assert_ne!(r.status.code(), Some(1), "{name}");
    }
}
