//! End-to-end tests of the command-line binary: file outputs, console
//! contracts, exit codes and determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hyperite"))
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("cfg.toml");
    let base = format!(
        r#"
[data]
n = 120
d = 3
noise_sd = 0.3
test_frac = 0.25

[training]
learning_rate = 0.01
batch_size = 64
patience = 10
max_steps = 30
hidden = [8]
trunk_hidden = [8]

[output]
directory = "{}"

{extra}
"#,
        dir.join("out").display()
    );
    std::fs::write(&path, base).unwrap();
    path
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

#[test]
fn gen_data_writes_the_documented_column_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[[learners]]\nkind = \"s_learner\"\n\n[experiment]\nseeds = [1]\n",
    );

    // d = 3: x0..x2, t, y, pi
    let out = run_ok(bin().args(["--config", cfg.to_str().unwrap(), "gen-data"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("120 rows"), "stdout: {stdout}");
    assert!(stdout.contains("treated fraction"));
    let text = std::fs::read_to_string(dir.path().join("out/data.csv")).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 6);
    assert_eq!(text.lines().count(), 121);

    // with surfaces: two extra columns
    let mu_path = dir.path().join("mu.csv");
    run_ok(bin().args([
        "--config",
        cfg.to_str().unwrap(),
        "gen-data",
        mu_path.to_str().unwrap(),
        "--with-mu",
    ]));
    let text = std::fs::read_to_string(&mu_path).unwrap();
    let header: Vec<&str> = text.lines().next().unwrap().split(',').collect();
    assert_eq!(header.len(), 8);
    assert!(header.contains(&"mu0") && header.contains(&"mu1"));

    // at d = 10: x0..x9, t, y, pi = 13 columns; 15 with the surfaces
    let wide_cfg = dir.path().join("wide.toml");
    std::fs::write(&wide_cfg, "[data]\nn = 50\nd = 10\n").unwrap();
    let wide = dir.path().join("wide.csv");
    let columns = |path: &Path| -> usize {
        let text = std::fs::read_to_string(path).unwrap();
        text.lines().next().unwrap().split(',').count()
    };
    run_ok(bin().args(["--config", wide_cfg.to_str().unwrap(), "gen-data", wide.to_str().unwrap()]));
    assert_eq!(columns(&wide), 13);
    run_ok(bin().args([
        "--config",
        wide_cfg.to_str().unwrap(),
        "gen-data",
        wide.to_str().unwrap(),
        "--with-mu",
    ]));
    assert_eq!(columns(&wide), 15);
}

#[test]
fn gen_data_rejects_invalid_dimensions_before_writing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[data]\nd = 0\n").unwrap();
    let out = bin().args(["--config", cfg.to_str().unwrap(), "gen-data"]).output().unwrap();
    assert!(!out.status.success());
    assert!(!dir.path().join("out").exists(), "no files may be written on invalid config");
}

#[test]
fn gen_data_is_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[[learners]]\nkind = \"s_learner\"\n\n[experiment]\nseeds = [1]\n",
    );
    run_ok(bin().args(["--config", cfg.to_str().unwrap(), "gen-data"]));
    let first = std::fs::read(dir.path().join("out/data.csv")).unwrap();
    run_ok(bin().args(["--config", cfg.to_str().unwrap(), "gen-data"]));
    let second = std::fs::read(dir.path().join("out/data.csv")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn run_emits_one_raw_record_per_learner_and_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[[learners]]
kind = "t_learner"

[[learners]]
kind = "t_learner"
mode = "hyper"

[experiment]
seeds = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10]
"#,
    );
    let out = run_ok(bin().args(["--config", cfg.to_str().unwrap(), "run"]));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("PEHE-in") && stdout.contains("PEHE-out"), "stdout: {stdout}");
    assert!(stdout.contains("t_learner") && stdout.contains("hyper_t_learner"));

    let raw = std::fs::read_to_string(dir.path().join("out/raw.jsonl")).unwrap();
    assert_eq!(raw.lines().count(), 20, "2 learners x 10 seeds");
    let results = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 3, "header + one row per learner");
    assert!(dir.path().join("out/traces.jsonl").exists());
}

#[test]
fn run_results_are_deterministic_and_idempotent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[[learners]]\nkind = \"s_learner\"\n\n[experiment]\nseeds = [4, 5]\n",
    );
    run_ok(bin().args(["--config", cfg.to_str().unwrap(), "run"]));
    let first = std::fs::read(dir.path().join("out/raw.jsonl")).unwrap();
    run_ok(bin().args(["--config", cfg.to_str().unwrap(), "run"]));
    let second = std::fs::read(dir.path().join("out/raw.jsonl")).unwrap();
    assert_eq!(first, second);
}

#[test]
fn parallel_jobs_reproduce_the_single_thread_results() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[[learners]]\nkind = \"s_learner\"\n\n[experiment]\nseeds = [6, 7, 8]\n",
    );
    run_ok(bin().args(["--config", cfg.to_str().unwrap(), "run"]));
    let single = std::fs::read(dir.path().join("out/raw.jsonl")).unwrap();
    run_ok(bin().args(["--config", cfg.to_str().unwrap(), "--jobs", "3", "run"]));
    let parallel = std::fs::read(dir.path().join("out/raw.jsonl")).unwrap();
    assert_eq!(single, parallel);
}

#[test]
fn seed_offset_shifts_every_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[[learners]]\nkind = \"s_learner\"\n\n[experiment]\nseeds = [1]\n",
    );
    run_ok(bin().args(["--config", cfg.to_str().unwrap(), "--seed-offset", "100", "run"]));
    let raw = std::fs::read_to_string(dir.path().join("out/raw.jsonl")).unwrap();
    assert!(raw.contains("\"seed\":101"), "raw: {raw}");
}

#[test]
fn out_flag_beats_env_var_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[[learners]]\nkind = \"s_learner\"\n\n[experiment]\nseeds = [1]\n",
    );
    let env_dir = dir.path().join("env_out");
    let flag_dir = dir.path().join("flag_out");

    run_ok(bin()
        .args(["--config", cfg.to_str().unwrap(), "run"])
        .env("HYPERITE_OUT", env_dir.to_str().unwrap()));
    assert!(env_dir.join("results.csv").exists(), "env var must override the config");

    run_ok(bin()
        .args(["--config", cfg.to_str().unwrap(), "--out", flag_dir.to_str().unwrap(), "run"])
        .env("HYPERITE_OUT", env_dir.join("ignored").to_str().unwrap()));
    assert!(flag_dir.join("results.csv").exists(), "flag must override the env var");
}

#[test]
fn sweep_requires_an_axis_and_writes_ordered_sweep_csv() {
    let dir = tempfile::tempdir().unwrap();
    let no_axis = write_config(
        dir.path(),
        "[[learners]]\nkind = \"s_learner\"\n\n[experiment]\nseeds = [1]\n",
    );
    let out = bin().args(["--config", no_axis.to_str().unwrap(), "sweep"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("sweep"));

    let cfg = write_config(
        dir.path(),
        r#"
[[learners]]
kind = "s_learner"

[experiment]
seeds = [1, 2]
sweep = "dataset_size"
sweep_sizes = [80, 60]
"#,
    );
    run_ok(bin().args(["--config", cfg.to_str().unwrap(), "sweep"]));
    let text = std::fs::read_to_string(dir.path().join("out/sweep.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,learner,y,err");
    assert!(lines[1].starts_with("60,"), "x values ascend: {}", lines[1]);
    assert!(lines[2].starts_with("80,"));
    // per-cell results present in the aggregate table
    let results = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 3, "header + one row per sweep value");
}

#[test]
fn embedding_sweep_yields_one_result_block_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[[learners]]
kind = "t_learner"
mode = "hyper"

[experiment]
seeds = [1]
sweep = "embedding_size"
sweep_sizes = [8, 16, 32]
"#,
    );
    run_ok(bin().args(["--config", cfg.to_str().unwrap(), "sweep"]));
    let results = std::fs::read_to_string(dir.path().join("out/results.csv")).unwrap();
    assert_eq!(results.lines().count(), 4, "header + one block per embedding size");
    for size in ["8", "16", "32"] {
        assert!(results.contains(&format!("hyper_t_learner,{size},")), "missing block {size}");
    }
}

#[test]
fn gradcheck_reports_all_suites_and_honors_the_negative_control() {
    let out = run_ok(bin().arg("gradcheck"));
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in ["nn_core", "generate_once", "chunk_wise", "layer_wise", "split_head"] {
        assert!(stdout.contains(name), "missing suite {name} in: {stdout}");
    }
    assert_eq!(stdout.matches("sn_on").count(), 4);
    assert_eq!(stdout.matches("sn_off").count(), 4);
    assert!(stdout.contains("worst relative error"));

    let bad = bin().args(["gradcheck", "--corrupt-adjoint"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(1), "corrupted adjoint must exit 1");
}

#[test]
fn csv_source_without_surfaces_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let data_path = dir.path().join("plain.csv");
    let mut rows = String::from("x0,t,y\n");
    for i in 0..80 {
        rows.push_str(&format!("{}.5,{},{}.0\n", i % 7, i % 2, i % 3));
    }
    std::fs::write(&data_path, rows).unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(
        &cfg,
        format!(
            r#"
[data]
source = "csv"
csv_path = "{}"
test_frac = 0.25

[[learners]]
kind = "s_learner"

[training]
max_steps = 10
hidden = [4]

[experiment]
seeds = [1]

[output]
directory = "{}"
"#,
            data_path.display(),
            dir.path().join("out").display()
        ),
    )
    .unwrap();
    let out = bin().args(["--config", cfg.to_str().unwrap(), "run"]).output().unwrap();
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("counterfactual"), "stderr: {stderr}");
}

#[test]
fn unknown_config_keys_fail_fast() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "[training]\nlearning_rte = 0.1\n").unwrap();
    let out = bin().args(["--config", cfg.to_str().unwrap(), "run"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("learning_rte"));
}
