use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use perclab_cli::manifest::RunManifest;

fn perclab(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perclab")).args(args).env("PERCLAB_OUT", dir).output().expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> RunManifest {
    let out = perclab(dir, args);
    assert_eq!(out.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 1, "{stdout}");
    let name = format!("{}-{}.json", args[0], seed_of(args));
    RunManifest::read(&dir.join(name)).unwrap()
}

fn seed_of<'a>(args: &[&'a str]) -> &'a str {
    args.iter().position(|a| *a == "--seed").map_or("1", |i| args[i + 1])
}

fn replay(dir: &Path, manifest: &str) -> Output {
    perclab(dir, &["replay", dir.join(manifest).to_str().unwrap()])
}

#[test]
fn theta_writes_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let m = ok(dir.path(), &["theta", "--r", "1", "--trials", "100000", "--seed", "7"]);
    assert_eq!(m.seed, 7);
    let csv = fs::read_to_string(dir.path().join("theta-7.csv")).unwrap();
    let row: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
    let (est, se): (f64, f64) = (row[1].parse().unwrap(), row[2].parse().unwrap());
    assert!((est - 63.0 / 128.0).abs() < 3.0 * se, "{est} ± {se}");
    assert_eq!(m.summary["estimate"], row[1]);
    // Round-trip formatting.
    assert_eq!(format!("{:?}", est), row[1]);
    assert_eq!(replay(dir.path(), "theta-7.json").status.code(), Some(0));
}

#[test]
fn usage_errors_exit_two_without_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    for args in [
        vec!["theta", "--bogus", "1"],
        vec!["nonsense"],
        vec!["theta", "--trials", "many"],
        vec!["theta", "--threads", "0"],
        vec!["theta", "--config", "/nonexistent/perclab.cfg"],
    ] {
        let out = perclab(&out_dir, &args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert!(!out_dir.exists());
    assert_eq!(perclab(&out_dir, &[]).status.code(), Some(2));
    assert_eq!(perclab(&out_dir, &["--help"]).status.code(), Some(0));
}

#[test]
fn runtime_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = perclab(dir.path(), &["arm", "--one-radii", "8", "--four-radii", "8", "--trials", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least 4 points"));
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn replay_detects_corruption_and_mismatch() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["centre", "--ns", "4,8", "--trials", "200", "--seed", "3"]);
    assert_eq!(replay(p, "centre-3.json").status.code(), Some(0));

    let text = fs::read_to_string(p.join("centre-3.json")).unwrap();
    fs::write(p.join("altered.json"), text.replace("\"seed\": 3", "\"seed\": 4")).unwrap();
    let out = replay(p, "altered.json");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));

    fs::write(p.join("garbage.json"), "{ not json").unwrap();
    let out = replay(p, "garbage.json");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("manifest corrupt"));

    fs::remove_file(p.join("centre-3.csv")).unwrap();
    let out = replay(p, "centre-3.json");
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("manifest corrupt"));

    assert_eq!(replay(p, "missing.json").status.code(), Some(1));
}

#[test]
fn replay_detects_edited_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    ok(p, &["volume", "--r", "8", "--ns", "1,2,3,4", "--trials", "50"]);
    let csv = p.join("volume-1.csv");
    let text = fs::read_to_string(&csv).unwrap();
    fs::write(&csv, format!("{text}extra\n")).unwrap();
    assert_eq!(replay(p, "volume-1.json").status.code(), Some(1));
}

#[test]
fn config_file_mirrors_flags() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let cfg = p.join("run.cfg");
    fs::write(&cfg, "# small run\ntrials = 500\nr = 2\nseed = 11\n").unwrap();
    let m = ok(p, &["theta", "--config", cfg.to_str().unwrap(), "--r", "1", "--seed", "11"]);
    assert_eq!(m.params, perclab_cli::args::Command::Theta(perclab_cli::args::ThetaArgs { r: 1, trials: 500, seed: 0 }));
    fs::write(&cfg, "unknown-key = 1\n").unwrap();
    assert_eq!(perclab(p, &["theta", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
    fs::write(&cfg, "no equals sign\n").unwrap();
    assert_eq!(perclab(p, &["theta", "--config", cfg.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn out_flag_beats_environment() {
    let dir = tempfile::tempdir().unwrap();
    let flag = dir.path().join("flag");
    let out = perclab(&dir.path().join("env"), &["theta", "--trials", "10", "--out", flag.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(flag.join("theta-1.json").exists());
    assert!(!dir.path().join("env").exists());
}

#[test]
fn results_do_not_depend_on_threads() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let args = ["pivotal-scale", "--radii", "4,8,16,32", "--trials", "64"];
    let one = perclab(&a, &[&args[..], &["--threads", "1"]].concat());
    let three = perclab(&b, &[&args[..], &["--threads", "3"]].concat());
    assert!(one.status.success() && three.status.success());
    assert_eq!(fs::read(a.join("pivotal-scale-1.csv")).unwrap(), fs::read(b.join("pivotal-scale-1.csv")).unwrap());
}

#[test]
fn every_subcommand_runs_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let runs: Vec<Vec<&str>> = vec![
        vec!["arm", "--one-radii", "4,8,16,32", "--four-radii", "4,8,16,32", "--trials", "200"],
        vec!["pivotal-scale", "--radii", "4,8,16,32", "--trials", "50"],
        vec!["window", "--radii", "4,8", "--s=-1,0,1", "--scale-radii", "4,8,16,32", "--scale-trials", "50", "--trials", "200"],
        vec!["kesten", "--epsilons", "0.1,0.5", "--r-max", "16", "--scale-radii", "4,8,16,32", "--scale-trials", "50", "--trials", "200"],
        vec!["quenched-iic", "--r", "1", "--horizons", "1,10", "--draws", "1000"],
        vec!["fetic-vs-iic", "--r", "4", "--big-r", "8", "--alpha4", "0.01", "--pairs", "50", "--window-samples", "50", "--resamples", "50"],
        vec!["centre", "--ns", "4,8", "--trials", "100"],
        vec!["collapse", "--big-r", "8", "--times", "0.0625,0.125,0.25,0.5", "--trials", "10"],
        vec!["volume", "--r", "8", "--ns", "1,2,3,4", "--trials", "50"],
        vec!["spectrum", "--sides", "2,3", "--trials", "2000"],
        vec!["selftest", "--b3-samples", "200"],
    ];
    for args in &runs {
        let m = ok(p, args);
        assert_eq!(m.command, args[0]);
        assert!(m.finished >= m.started);
        assert!(!m.summary.is_empty());
        let out = replay(p, &format!("{}-1.json", args[0]));
        assert_eq!(out.status.code(), Some(0), "replay {}: {}", args[0], String::from_utf8_lossy(&out.stderr));
    }
    // No stray temporaries.
    assert!(fs::read_dir(p).unwrap().all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn fetic_precondition_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = perclab(dir.path(), &["fetic-vs-iic", "--r", "4", "--big-r", "8", "--alpha4", "0.5", "--pairs", "10"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("precondition"));
}
