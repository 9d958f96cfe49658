//! End-to-end runs of the `bo-pomdp` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const TINY: &str = r#"{
  "workspace": {"x_min": 0.0, "x_max": 6.0, "y_min": 0.0, "y_max": 6.0},
  "terrain": {
    "kind": "two-pits",
    "narrow": {"center": [4.5, 1.5], "amplitude": -20.0, "width": 0.6},
    "wide": {"center": [1.5, 4.5], "amplitude": -12.0, "width": 1.2}
  },
  "gp": {"kernel": "rbf", "lengthscale": 0.8, "signal_variance": 50.0},
  "planner": {"kind": "bo-pomdp", "depth_max": 2, "mcts_iterations": 15},
  "episode": {"steps": 4, "trials": 2, "eval_grid": [10, 10]},
  "base_seed": 3
}"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bo-pomdp"));
    c.env_remove("BO_POMDP_JOBS");
    c
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn smoke_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--planner",
        "random",
        "--trials",
        "1",
        "--steps",
        "5",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    for f in ["episode_0.csv", "belief_0.csv", "trajectory_0.csv", "summary.json", "resolved_config.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    assert!(!out.join("episode_1.csv").exists());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().count(), 1);
    assert!(stdout.starts_with("random:"));
    assert_eq!(fs::read_to_string(out.join("episode_0.csv")).unwrap().lines().count(), 6);
}

#[test]
fn overrides_are_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("out");
    let o = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--planner",
        "myopic",
        "--seed",
        "99",
        "--steps",
        "2",
        "--trials",
        "1",
        "--depth",
        "1",
        "--kappa",
        "2.5",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let resolved: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("resolved_config.json")).unwrap()).unwrap();
    assert_eq!(resolved["planner"]["kind"], "myopic");
    assert_eq!(resolved["base_seed"], 99);
    assert_eq!(resolved["episode"]["steps"], 2);
    assert_eq!(resolved["episode"]["trials"], 1);
    assert_eq!(resolved["planner"]["depth_max"], 1);
    assert_eq!(resolved["reward"]["kappa"], 2.5);
    assert_eq!(resolved["output_dir"], out.to_str().unwrap());
}

#[test]
fn unknown_planner_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--planner", "greedy"]);
    assert_eq!(o.status.code(), Some(1));
    let msg = stderr(&o);
    for name in ["bo-pomdp", "myopic", "explorer", "sbo", "random"] {
        assert!(msg.contains(name), "{msg}");
    }
}

#[test]
fn missing_field_is_named() {
    let dir = tempfile::tempdir().unwrap();
    let text = TINY.replace(
        r#""gp": {"kernel": "rbf", "lengthscale": 0.8, "signal_variance": 50.0},"#,
        "",
    );
    let cfg = write_config(dir.path(), &text);
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("gp"), "{}", stderr(&o));
}

#[test]
fn bad_arguments_exit_one() {
    let o = run(&["run"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["run", "--config", "/nonexistent/config.json"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn runtime_failure_exits_two() {
    // a grid terrain smaller than the workspace fails once the robot leaves it
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
      "workspace": {"x_min": 0.0, "x_max": 10.0, "y_min": 0.0, "y_max": 10.0},
      "terrain": {"kind": "grid-data", "x_min": 4.0, "x_max": 6.0, "y_min": 4.0, "y_max": 6.0,
                  "nx": 2, "ny": 2, "values": [0.0, 1.0, 2.0, 3.0]},
      "sensor": {"noise_std": 0.1},
      "gp": {"kernel": "rbf", "lengthscale": 1.0, "signal_variance": 1.0},
      "planner": {"kind": "random"},
      "episode": {"steps": 20, "trials": 1}
    }"#;
    let cfg = write_config(dir.path(), text);
    let out = dir.path().join("out");
    let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

fn read_all(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "csv"))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn reruns_are_byte_identical_across_job_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let mut outputs = Vec::new();
    for (i, jobs) in ["1", "1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("out{i}"));
        let o = bin()
            .args(["run", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()])
            .env("BO_POMDP_JOBS", jobs)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push(read_all(&out));
    }
    assert_eq!(outputs[0].len(), 8);
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn compare_writes_one_column_per_planner() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("cmp");
    let o = run(&[
        "compare",
        "--config",
        cfg.to_str().unwrap(),
        "--planners",
        "random,myopic",
        "--out-dir",
        out.to_str().unwrap(),
        "--jobs",
        "2",
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(out.join("comparison.csv")).unwrap();
    let header = text.lines().next().unwrap();
    assert_eq!(header, "step,random,myopic");
    assert_eq!(text.lines().count(), 1 + 4);
    let summary = fs::read_to_string(out.join("comparison_summary.csv")).unwrap();
    assert!(summary.lines().next().unwrap().contains("rmse_mean,rmse_std,wrmse_mean"));
    assert_eq!(summary.lines().count(), 3);
    assert_eq!(String::from_utf8_lossy(&o.stdout).lines().count(), 2);

    // paired seeds: the first observation of every trial sees the same noise
    // draw, so with identical first actions the observation files agree
    for trial in 0..2 {
        let a = fs::read_to_string(out.join("random").join(format!("observations_{trial}.csv"))).unwrap();
        let b = fs::read_to_string(out.join("myopic").join(format!("observations_{trial}.csv"))).unwrap();
        let ea = fs::read_to_string(out.join("random").join(format!("episode_{trial}.csv"))).unwrap();
        let eb = fs::read_to_string(out.join("myopic").join(format!("episode_{trial}.csv"))).unwrap();
        let first_action = |e: &str| e.lines().nth(1).unwrap().split(',').nth(4).unwrap().to_string();
        if first_action(&ea) == first_action(&eb) {
            assert_eq!(a.lines().nth(1), b.lines().nth(1));
        }
    }
}
