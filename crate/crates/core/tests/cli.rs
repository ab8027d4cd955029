use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_helstrom-lab");

fn lab(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn fixture() -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs/paper_fixture.cfg")
        .display()
        .to_string()
}

#[test]
fn single_point_sweep_writes_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.csv");
    let o = lab(&[
        "sweep",
        "--set",
        "b=10",
        "--set",
        "delta=0.001",
        "--set",
        "k=5",
        "--quiet",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.ends_with('\n') && !csv.contains('\r'));
    assert!(dir.path().join("one.summary.txt").exists());
    assert!(o.stderr.is_empty());
}

#[test]
fn set_overrides_config_entries() {
    let o = lab(&[
        "sweep",
        "--config",
        &fixture(),
        "--set",
        "k=2",
        "--set",
        "delta=0.01",
        "--quiet",
    ]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
}

#[test]
fn validation_errors_exit_with_one() {
    let o = lab(&[
        "sweep",
        "--set",
        "b=10",
        "--set",
        "delta=0.01",
        "--set",
        "k=1",
        "--set",
        "xi=1.5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    let o = lab(&["run", "--config", &fixture()]);
    assert_eq!(o.status.code(), Some(1));
    let o = lab(&["sweep", "--config", "/nonexistent/cfg"]);
    assert_eq!(o.status.code(), Some(1));
    let o = lab(&[
        "scaling",
        "--set",
        "b=10",
        "--set",
        "delta=0.01",
        "--set",
        "k=1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = lab(&[
        "optimize",
        "--set",
        "b=10",
        "--set",
        "delta=0.01",
        "--set",
        "k=1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    let o = lab(&["sweep", "--mode", "fast"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn degenerate_input_exits_with_two() {
    // Hypothesis 0 rotates fully into the watched level on the first cycle.
    let args = [
        "--set",
        "b=0",
        "--set",
        "delta=1",
        "--set",
        "dt=1.5707963267948966",
        "--set",
        "k=2",
        "--set",
        "direction=0,1,0,0,0",
        "--quiet",
    ];
    let o = lab(&[&["run"][..], &args].concat());
    assert_eq!(
        o.status.code(),
        Some(2),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(!o.stdout.is_empty());
    let o = lab(&[&["sweep"][..], &args].concat());
    assert!(o.status.success());
    let o = lab(&[
        "run",
        "--set",
        "b=10",
        "--set",
        "delta=0.01",
        "--set",
        "k=1",
        "--set",
        "direction=0,0,0,0,0",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn run_prints_the_outcome_tree() {
    let o = lab(&[
        "run",
        "--set",
        "b=10",
        "--set",
        "delta=0.001",
        "--set",
        "k=3",
        "--mode",
        "paper",
        "--quiet",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let leaves: Vec<&str> = text
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap())
        .collect();
    assert_eq!(
        leaves,
        ["click@1", "click@2", "click@3", "survived", "total"]
    );
}

#[test]
fn baseline_and_scaling_and_optimize_succeed() {
    let o = lab(&[
        "baseline",
        "--set",
        "b=10",
        "--set",
        "delta=0.01",
        "--set",
        "k=1",
    ]);
    assert!(o.status.success());
    assert!(String::from_utf8(o.stdout)
        .unwrap()
        .contains("2.5062814466900"));
    let o = lab(&[
        "scaling",
        "--set",
        "b=10",
        "--set",
        "delta=0.01,0.003,0.001",
        "--set",
        "k=2",
        "--set",
        "quantity=k_step_survival",
    ]);
    assert!(o.status.success());
    assert_eq!(String::from_utf8(o.stdout).unwrap().lines().count(), 2);
    let o = lab(&[
        "optimize",
        "--set",
        "b=10",
        "--set",
        "delta=0.001",
        "--set",
        "k=1",
        "--set",
        "optimize_k=1..6",
        "--mode",
        "paper",
        "--quiet",
    ]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().nth(1).unwrap().split(',').nth(6), Some("6"));
}

#[test]
fn repeated_sweeps_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths = ["a.csv", "b.csv"].map(|n| dir.path().join(n));
    for p in &paths {
        let o = lab(&[
            "sweep",
            "--config",
            &fixture(),
            "--quiet",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert!(o.status.success());
    }
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
    assert_eq!(
        fs::read(dir.path().join("a.summary.txt")).unwrap(),
        fs::read(dir.path().join("b.summary.txt")).unwrap()
    );
}
