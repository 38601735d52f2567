//! End-to-end checks of the `fboal` binary: verbs, exit statuses and the
//! artifact tree.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const TINY: &str = r#"
[experiment]
name = "tiny"
problem = "burgers"
param_values = [0.0116]
seeds = [0]
samplers = ["static", "fboal"]
density_bins = 10

[training]
budget = 64
resample_period = 20
swap_count = 4
subdomain_count = 16
max_iterations = 60
threshold = 1e-9
hidden_layers = [8, 8]
validation_grid = [32, 16]

[[training.lr_stages]]
lr = 0.001
iterations = 60
"#;

fn fboal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fboal")).args(args).env("RUST_LOG", "warn").output().unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn help_exits_zero_and_lists_verbs() {
    let out = fboal(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    for verb in ["run", "compare", "sweep", "export-density"] {
        assert!(text.contains(verb), "{verb} missing from help");
    }
}

#[test]
fn bad_arguments_exit_two() {
    assert_eq!(fboal(&["run"]).status.code(), Some(2));
    assert_eq!(fboal(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn invalid_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("out");
    let out = out_dir.to_str().unwrap();

    let unknown = fboal(&["run", "--config", "no-such-preset", "--out", out]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("burgers-compare"), "preset list is printed");

    let typo = write_config(dir.path(), &TINY.replace("swap_count", "swapcount"));
    assert_eq!(fboal(&["run", "--config", &typo, "--out", out]).status.code(), Some(2));

    let m_above_d = write_config(dir.path(), &TINY.replace("swap_count = 4", "swap_count = 40"));
    assert_eq!(fboal(&["run", "--config", &m_above_d, "--out", out]).status.code(), Some(2));

    let cfg = write_config(dir.path(), TINY);
    assert_eq!(fboal(&["run", "--config", &cfg, "--out", out, "--scale", "1.5"]).status.code(), Some(2));
    assert_eq!(fboal(&["run", "--config", &cfg, "--out", out, "--jobs", "0"]).status.code(), Some(2));
    // comparing needs at least two samplers
    let single = write_config(dir.path(), &TINY.replace(r#"["static", "fboal"]"#, r#"["fboal"]"#));
    assert_eq!(fboal(&["compare", "--config", &single, "--out", out]).status.code(), Some(2));
}

#[test]
fn divergence_exits_three_and_keeps_last_good_network() {
    let dir = tempfile::tempdir().unwrap();
    let text = TINY.replace("lr = 0.001", "lr = 1000000.0").replace(r#"["static", "fboal"]"#, r#"["static"]"#);
    let cfg = write_config(dir.path(), &text);
    let out_dir = dir.path().join("out");
    let out = fboal(&["run", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let run = out_dir.join("runs/static/nu-0.0116/seed-0");
    assert!(run.join("diverged.json").exists());
    assert!(run.join("network_last_good.txt").exists());
    assert!(!run.join("summary.json").exists());
}

#[test]
fn run_writes_artifacts_and_resume_skips_finished_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out_dir = dir.path().join("out");
    let out = out_dir.to_str().unwrap();

    let first = fboal(&["run", "--config", &cfg, "--out", out, "--seed-list", "3"]);
    assert_eq!(first.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&first.stderr));
    let run = out_dir.join("runs/fboal/nu-0.0116/seed-3");
    for f in [
        "summary.json",
        "timing.json",
        "log.jsonl",
        "loss.csv",
        "collocation_initial.csv",
        "collocation_final.csv",
        "density_x.csv",
        "density_t.csv",
        "network.txt",
    ] {
        assert!(run.join(f).exists(), "{f} missing");
    }
    assert!(out_dir.join("summary.csv").exists());
    assert!(out_dir.join("config.toml").exists());
    let losses = fs::read_to_string(run.join("loss.csv")).unwrap();
    assert_eq!(losses.lines().filter(|l| !l.starts_with('#')).count(), 61, "header plus one row per iteration");

    let stamp = fs::metadata(run.join("network.txt")).unwrap().modified().unwrap();
    let again = fboal(&["run", "--config", &cfg, "--out", out, "--seed-list", "3", "--resume"]);
    assert_eq!(again.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&again.stdout).contains("(resumed)"));
    assert_eq!(fs::metadata(run.join("network.txt")).unwrap().modified().unwrap(), stamp);
}

#[test]
fn compare_sweep_and_density_export() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out_dir = dir.path().join("out");
    let out = out_dir.to_str().unwrap();

    let cmp = fboal(&["compare", "--config", &cfg, "--out", out, "--jobs", "2"]);
    assert_eq!(cmp.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&cmp.stderr));
    let table = fs::read_to_string(out_dir.join("comparison.csv")).unwrap();
    assert!(table.starts_with("# fboal-comparison v1"));
    assert!(table.contains("static/") && table.contains("fboal/"));

    let exported = fboal(&["export-density", "--out", out, "--axis", "t", "--bins", "5", "--strip", "-0.5,0.5"]);
    assert_eq!(exported.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&exported.stderr));
    assert!(out_dir.join("runs/fboal/nu-0.0116/seed-0/density_t_5.csv").exists());

    let sweep_dir = dir.path().join("sweep");
    let sw = sweep_dir.to_str().unwrap();
    let empty = fboal(&["sweep", "--config", &cfg, "--out", sw, "--axis", "m", "--values", ""]);
    assert_eq!(empty.status.code(), Some(0));
    assert!(!sweep_dir.exists(), "an empty sweep writes nothing");

    let swept = fboal(&["sweep", "--config", &cfg, "--out", sw, "--axis", "m", "--values", "2,3.125%"]);
    assert_eq!(swept.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&swept.stderr));
    assert!(sweep_dir.join("m-2/summary.csv").exists());
    assert!(sweep_dir.join("m-3.125pct/summary.csv").exists());
    let table = fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    assert!(table.starts_with("# fboal-sweep v1"));
    assert_eq!(table.lines().count(), 1 + 1 + 4, "comment, header, two samplers × two values");

    assert_eq!(fboal(&["sweep", "--config", &cfg, "--out", sw, "--axis", "q", "--values", "1"]).status.code(), Some(2));
    assert_eq!(fboal(&["sweep", "--config", &cfg, "--out", sw, "--axis", "k", "--values", "1%"]).status.code(), Some(2));
}

#[test]
fn malformed_strip_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().to_str().unwrap();
    for strip in ["0.5", "0.5,0.2", "0.1,0.2,0.3"] {
        let status = fboal(&["export-density", "--out", out, "--config", &cfg, "--strip", strip]).status.code();
        assert_eq!(status, Some(2), "--strip {strip}");
    }
}

#[test]
fn sweep_without_values_is_a_no_op() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), TINY);
    let out = dir.path().join("sweep");
    for extra in [&["--values"][..], &[][..]] {
        let mut args = vec!["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--axis", "d"];
        args.extend_from_slice(extra);
        assert_eq!(fboal(&args).status.code(), Some(0));
    }
    assert!(!out.exists());
    assert_eq!(fboal(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap(), "--axis", "d", "--values", "x"]).status.code(), Some(2));
}
