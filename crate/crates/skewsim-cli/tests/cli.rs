//! End-to-end tests of the `skewsim` binary: exit codes, printed output,
//! run-directory layout, and byte-level reproducibility.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skewsim"))
}

fn run(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = bin();
    cmd.args(args);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("failed to spawn skewsim")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_file(path: &Path, text: &str) {
    std::fs::write(path, text).unwrap();
}

const QUICK_E2: &str = "\
[group]
kind = \"e2\"

[dynamics]
gamma = 0.7

[ensemble]
n_traj = 40
n_steps = 20000
burn_in = 1000
record_stride = 50

[seeds]
base_seed = 7
";

fn simulate_quick(dir: &Path, name: &str, envs: &[(&str, &str)]) -> (PathBuf, String) {
    let cfg = dir.join(format!("{name}.toml"));
    write_file(&cfg, QUICK_E2);
    let out_dir = dir.join(name);
    let out = run(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
        envs,
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    (out_dir, stdout_of(&out))
}

#[test]
fn gamma_out_of_range_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.toml");
    write_file(&cfg, "[dynamics]\ngamma = 1.2\n");
    let out = run(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("r").to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("gamma out of range [0,1): got 1.2"), "stderr: {err}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("typo.toml");
    write_file(&cfg, "[dynamics]\ngama = 0.5\n");
    let out = run(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("r").to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_of(&out);
    assert!(err.contains("gama"), "stderr should name the unknown key: {err}");

    // Keys that belong to a different group are also refused, not ignored.
    let cfg2 = tmp.path().join("wrong_group.toml");
    write_file(&cfg2, "[group]\nkind = \"aniso\"\n\n[observables]\nh_c0 = 1.0\n");
    let out2 = run(
        &["simulate", "--config", cfg2.to_str().unwrap(), "--out", tmp.path().join("r2").to_str().unwrap()],
        &[],
    );
    assert_eq!(out2.status.code(), Some(2));
    assert!(stderr_of(&out2).contains("h_c0"), "stderr: {}", stderr_of(&out2));
}

#[test]
fn missing_run_directory_is_a_data_error() {
    let tmp = tempfile::tempdir().unwrap();
    let missing = tmp.path().join("no_such_run");
    let out = run(&["analyze", "--run", missing.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr_of(&out).starts_with("error: data error:"), "stderr: {}", stderr_of(&out));
}

#[test]
fn unknown_figure_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    // The figure name is validated before the run directory is touched.
    let out = run(
        &["report", "--run", tmp.path().join("nowhere").to_str().unwrap(), "--figure", "fig9"],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("unknown figure `fig9`"), "stderr: {}", stderr_of(&out));
}

#[test]
fn bad_worker_env_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    write_file(&cfg, QUICK_E2);
    for bad in ["0", "many"] {
        let out = run(
            &["simulate", "--config", cfg.to_str().unwrap(), "--out", tmp.path().join("r").to_str().unwrap()],
            &[("SKEWSIM_WORKERS", bad)],
        );
        assert_eq!(out.status.code(), Some(2), "SKEWSIM_WORKERS={bad}");
        assert!(stderr_of(&out).contains("SKEWSIM_WORKERS"), "stderr: {}", stderr_of(&out));
    }
}

#[test]
fn pipeline_runs_and_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let (run_a, stdout_a) = simulate_quick(tmp.path(), "a", &[]);
    assert!(
        stdout_a.contains("simulated 40 e2 trajectories x 20000 steps (gamma = 0.7)"),
        "stdout: {stdout_a}"
    );
    assert!(stdout_a.contains("config sha256: "), "stdout: {stdout_a}");

    // Same config, fresh directory: identical bytes on disk.
    let (run_b, _) = simulate_quick(tmp.path(), "b", &[]);
    let csv_a = std::fs::read(run_a.join("trajectories.csv")).unwrap();
    let csv_b = std::fs::read(run_b.join("trajectories.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "reruns of one config must write identical trajectories");

    // Worker count changes scheduling, never results.
    let (run_c, _) = simulate_quick(tmp.path(), "c", &[("SKEWSIM_WORKERS", "3")]);
    let csv_c = std::fs::read(run_c.join("trajectories.csv")).unwrap();
    assert_eq!(csv_a, csv_c, "worker count must not leak into the output");

    // Analyze: headline exponent plus classification, and the report lands
    // in the run directory.
    let out = run(&["analyze", "--run", run_a.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("growth exponent "), "stdout: {text}");
    assert!(text.contains("classification: "), "stdout: {text}");
    assert!(run_a.join("analysis.json").is_file());

    // Report: every figure file carries the config hash in its header.
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_a.join("manifest.json")).unwrap()).unwrap();
    let hash = manifest["config_sha256"].as_str().unwrap();
    let out = run(&["report", "--run", run_a.to_str().unwrap(), "--figure", "fig3"], &[]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let mut n_files = 0;
    for line in stdout_of(&out).lines() {
        let path = line.strip_prefix("wrote ").expect("report lines start with `wrote `");
        let contents = std::fs::read_to_string(path).unwrap();
        assert!(
            contents.lines().any(|l| l == format!("# config_sha256: {hash}")),
            "{path} is missing the config hash header"
        );
        n_files += 1;
    }
    assert_eq!(n_files, 3, "fig3 writes trace, series, and inset files");
}

#[test]
fn row_count_contract_and_step_zero_row() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("tiny.toml");
    write_file(
        &cfg,
        "[group]\nkind = \"aniso\"\ndim = 1\n\n[dynamics]\ngamma = 0.2\n\n\
         [ensemble]\nn_traj = 2\nn_steps = 100\nburn_in = 10\nrecord_stride = 1\n\n\
         [seeds]\nbase_seed = 3\n",
    );
    let out_dir = tmp.path().join("tiny");
    let out = run(
        &["simulate", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let csv = std::fs::read_to_string(out_dir.join("trajectories.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    // Header + 2 trajectories x 101 samples (steps 0, 1, ..., 100).
    assert_eq!(lines.len(), 1 + 2 * 101);
    assert_eq!(lines[0], "traj_index,step,p_1,x");
    assert!(lines[1].starts_with("0,0,0"), "first sample is the origin at step 0: {}", lines[1]);
    assert!(lines[102].starts_with("1,0,0"), "second trajectory restarts at step 0: {}", lines[102]);
}

#[test]
fn base_seed_env_override_is_recorded() {
    let tmp = tempfile::tempdir().unwrap();
    let (run_dir, _) = simulate_quick(tmp.path(), "seeded", &[("SKEWSIM_BASE_SEED", "99")]);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["seeds"]["base_seed"], 99);

    let bad = run(
        &["simulate", "--config", tmp.path().join("seeded.toml").to_str().unwrap(), "--out", tmp.path().join("x").to_str().unwrap()],
        &[("SKEWSIM_BASE_SEED", "not-a-seed")],
    );
    assert_eq!(bad.status.code(), Some(2));
    assert!(stderr_of(&bad).contains("SKEWSIM_BASE_SEED"), "stderr: {}", stderr_of(&bad));
}

#[test]
fn analysis_options_file_is_honored_and_checked() {
    let tmp = tempfile::tempdir().unwrap();
    let (run_dir, _) = simulate_quick(tmp.path(), "opts", &[]);

    let good = tmp.path().join("analysis.toml");
    write_file(&good, "[analysis]\nlaminar_cutoffs = [0.15]\nlaminar_steps = 1000000\n");
    let out = run(
        &["analyze", "--run", run_dir.to_str().unwrap(), "--analysis", good.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("analysis.json")).unwrap()).unwrap();
    assert_eq!(report["laminar"]["cutoffs"][0]["x_c"], 0.15);
    assert_eq!(report["laminar"]["orbit_steps"], 1000000);

    let bad = tmp.path().join("bad_analysis.toml");
    write_file(&bad, "[analysis]\nlaminar_cutoffs = [0.15]\nbogus = 1\n");
    let out = run(
        &["analyze", "--run", run_dir.to_str().unwrap(), "--analysis", bad.to_str().unwrap()],
        &[],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("bogus"), "stderr: {}", stderr_of(&out));
}

#[test]
fn example_configs_parse() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    let mut n = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) != Some("toml") {
            continue;
        }
        let text = std::fs::read_to_string(&path).unwrap();
        skewsim_cli::config::parse_config(&text)
            .unwrap_or_else(|e| panic!("{} does not parse: {e}", path.display()));
        n += 1;
    }
    assert!(n >= 10, "expected the full set of example configs, found {n}");
}
