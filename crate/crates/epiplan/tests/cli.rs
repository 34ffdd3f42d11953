//! End-to-end tests of the `epiplan` binary: exit codes, artifact layout,
//! config resolution order, and run-to-run determinism of the saved files.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_epiplan")
}

/// Runs the binary with `--out dir` plus the given arguments.
fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .arg("--out")
        .arg(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(output: &Output) -> String {
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn stderr(output: &Output) -> String {
    String::from_utf8_lossy(&output.stderr).into_owned()
}

fn assert_ok(output: &Output, context: &str) {
    assert!(
        output.status.success(),
        "{context} failed (status {:?}):\nstdout: {}\nstderr: {}",
        output.status.code(),
        stdout(output),
        stderr(output)
    );
}

/// Overrides that shrink the pipeline to test scale while leaving every
/// stage in place.
const REDUCED: &[&str] = &[
    "--set", "e=4",
    "--set", "n_train_ep=3",
    "--set", "max_steps=200",
    "--set", "eval_max_steps=300",
];

fn run_reduced(dir: &Path, command: &[&str]) -> Output {
    let mut args: Vec<&str> = REDUCED.to_vec();
    args.extend_from_slice(command);
    run_in(dir, &args)
}

/// Drives phase1 -> phase2 -> train --traces -> eval in `dir`.
fn full_pipeline(dir: &Path) {
    for command in [
        &["phase1"][..],
        &["phase2"][..],
        &["train", "--traces"][..],
        &["eval"][..],
    ] {
        let output = run_reduced(dir, command);
        assert_ok(&output, &format!("{command:?} in {}", dir.display()));
    }
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let output = Command::new(bin()).arg(flag).output().unwrap();
        assert_eq!(output.status.code(), Some(0), "{flag}");
    }
    let help = Command::new(bin()).arg("--help").output().unwrap();
    let text = stdout(&help);
    for sub in ["track-gen", "phase1", "phase2", "train", "eval", "baseline"] {
        assert!(text.contains(sub), "--help lacks `{sub}`:\n{text}");
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[&[&str]] = &[
        &["no-such-command"],
        &["--set", "missing_equals", "phase1"],
        &["baseline", "--agent", "walls"],
        &["export-heatmap", "--kind", "sideways"],
    ];
    for args in cases {
        let output = run_in(dir.path(), args);
        assert_eq!(output.status.code(), Some(1), "{args:?}:\n{}", stderr(&output));
    }
}

#[test]
fn runtime_errors_exit_two_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    // Phase 2 with no phase-1 artifacts to load.
    let output = run_in(dir.path(), &["phase2"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).starts_with("error: "), "{}", stderr(&output));

    // Structurally valid --set that fails validation.
    let output = run_in(dir.path(), &["--set", "g=1", "phase1"]);
    assert_eq!(output.status.code(), Some(2));

    // Unknown config key.
    let output = run_in(dir.path(), &["--set", "warp_drive=9", "phase1"]);
    assert_eq!(output.status.code(), Some(2));
    assert!(stderr(&output).contains("warp_drive"));
}

#[test]
fn track_gen_writes_one_file_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(dir.path(), &["track-gen"]);
    assert_ok(&output, "track-gen");
    let text = stdout(&output);
    assert_eq!(text.matches("track seed=").count(), 6);
    for seed in [1u64, 2, 3, 4, 5, 99] {
        let path = dir.path().join(format!("track_{seed}.txt"));
        let content = std::fs::read_to_string(&path)
            .unwrap_or_else(|e| panic!("{} missing: {e}", path.display()));
        assert!(content.starts_with("epiplan-track"), "{}", path.display());
    }
}

#[test]
fn pipeline_writes_artifacts_and_repeats_byte_identically() {
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    full_pipeline(dir_a.path());
    full_pipeline(dir_b.path());

    for file in [
        "config.txt",
        "db.txt",
        "masks.txt",
        "encoder.txt",
        "curve.csv",
        "traces.txt",
        "metrics.txt",
    ] {
        assert!(dir_a.path().join(file).exists(), "{file} missing");
    }
    let curve = std::fs::read_to_string(dir_a.path().join("curve.csv")).unwrap();
    assert!(curve.starts_with("# epiplan-curve v1"), "{curve}");
    let metrics = std::fs::read_to_string(dir_a.path().join("metrics.txt")).unwrap();
    assert!(metrics.starts_with("epiplan-metrics v1"), "{metrics}");
    assert!(metrics.contains("planner "), "{metrics}");

    // The saved memory and the recorded metrics must not depend on where or
    // when the run happened. (config.txt records out_dir, so it differs.)
    for file in ["db.txt", "masks.txt", "encoder.txt", "metrics.txt", "curve.csv", "traces.txt"] {
        let a = std::fs::read(dir_a.path().join(file)).unwrap();
        let b = std::fs::read(dir_b.path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
    }
}

#[test]
fn eval_prints_the_metrics_line() {
    let dir = tempfile::tempdir().unwrap();
    full_pipeline(dir.path());
    let output = run_reduced(dir.path(), &["eval"]);
    assert_ok(&output, "eval");
    let line = stdout(&output);
    assert!(
        line.starts_with("planner success_rate="),
        "unexpected eval output: {line}"
    );
    for field in ["avg_speed_kmh=", "episodes=", "env_interactions="] {
        assert!(line.contains(field), "missing {field}: {line}");
    }
}

#[test]
fn baselines_append_rows_to_the_metrics_file() {
    let dir = tempfile::tempdir().unwrap();
    for agent in ["random", "centerline"] {
        let output = run_reduced(dir.path(), &["baseline", "--agent", agent]);
        assert_ok(&output, agent);
        assert!(stdout(&output).starts_with(&format!("{agent} success_rate=")));
    }
    let metrics = std::fs::read_to_string(dir.path().join("metrics.txt")).unwrap();
    assert!(metrics.contains("random "));
    assert!(metrics.contains("centerline "));
}

#[test]
fn heatmaps_and_inspection_work_on_a_trained_run() {
    let dir = tempfile::tempdir().unwrap();
    full_pipeline(dir.path());

    for kind in ["population", "value"] {
        let output = run_reduced(dir.path(), &["export-heatmap", "--kind", kind]);
        assert_ok(&output, kind);
        let csv = dir.path().join(format!("heatmap_{kind}.csv"));
        let pgm = dir.path().join(format!("heatmap_{kind}.pgm"));
        assert!(csv.exists() && pgm.exists(), "{kind} files missing");
        let pgm_text = std::fs::read_to_string(&pgm).unwrap();
        assert!(pgm_text.starts_with("P2\n"), "{kind} PGM header: {pgm_text:.20}");
    }

    let output = run_reduced(
        dir.path(),
        &["inspect-state", "--episode", "0", "--step", "3", "--ranks", "1,5"],
    );
    assert_ok(&output, "inspect-state");
    let text = stdout(&output);
    assert!(text.contains("rank 1:") && text.contains("rank 5:"), "{text}");
    assert!(dir.path().join("inspect.txt").exists());

    // Out-of-range queries are runtime errors.
    let output = run_reduced(dir.path(), &["inspect-state", "--episode", "9999", "--step", "0"]);
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn config_resolution_prefers_flag_then_env_then_defaults() {
    // Produce a config file recording e=3 by letting the binary write one.
    let seed_dir = tempfile::tempdir().unwrap();
    let output = run_in(seed_dir.path(), &["--set", "e=3", "track-gen"]);
    assert_ok(&output, "track-gen for config file");
    let config_path = seed_dir.path().join("config.txt");
    assert!(config_path.exists());
    let config_arg = config_path.to_str().unwrap();

    // --config file applies.
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(dir.path(), &["--config", config_arg, "phase1"]);
    assert_ok(&output, "phase1 with --config");
    assert!(stdout(&output).contains("phase1 episodes=3"), "{}", stdout(&output));

    // EPIPLAN_CONFIG applies when --config is absent.
    let dir = tempfile::tempdir().unwrap();
    let output = Command::new(bin())
        .env("EPIPLAN_CONFIG", config_arg)
        .arg("--out")
        .arg(dir.path())
        .arg("phase1")
        .output()
        .unwrap();
    assert_ok(&output, "phase1 with EPIPLAN_CONFIG");
    assert!(stdout(&output).contains("phase1 episodes=3"), "{}", stdout(&output));

    // --set overrides the file.
    let dir = tempfile::tempdir().unwrap();
    let output = run_in(dir.path(), &["--config", config_arg, "--set", "e=2", "phase1"]);
    assert_ok(&output, "phase1 with --config and --set");
    assert!(stdout(&output).contains("phase1 episodes=2"), "{}", stdout(&output));
}
