//! The `gpsvmc` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    let out = dir.join("out");
    std::fs::write(
        &path,
        format!(
            "{body}\n[output]\ndir = {:?}\ntiming = false\n",
            out.display().to_string()
        ),
    )
    .unwrap();
    path
}

const CHAIN: &str = r#"
[system]
kind = "heisenberg"
lattice = [6]
boundary = ["periodic"]

[model]
variant = "ar-gps"
support = 2

[sampling]
n_samples = 128

[optimizer]
n_iterations = 4
"#;

fn gpsvmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpsvmc"))
        .args(args)
        .env("GPSVMC_WORKERS", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn run_writes_trace_and_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CHAIN);
    let text = stdout(&gpsvmc(&["run", cfg.to_str().unwrap()]));
    assert!(text.contains("4 iterations"), "{text}");
    let trace = std::fs::read_to_string(dir.path().join("out/trace.csv")).unwrap();
    assert_eq!(trace.lines().count(), 5);
    assert!(dir.path().join("out/checkpoint.txt").exists());
}

#[test]
fn sweep_prints_one_row_per_grid_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CHAIN);
    let text = stdout(&gpsvmc(&["sweep", cfg.to_str().unwrap(), "--grid", "M=1,2;seed=1,2"]));
    assert_eq!(text.lines().count(), 5, "{text}");
}

#[test]
fn ed_and_sample() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), CHAIN);
    let ed = stdout(&gpsvmc(&["ed", cfg.to_str().unwrap()]));
    let row = ed.lines().nth(1).unwrap();
    let e0: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
    assert!((e0 + 2.8027756377).abs() < 1e-8, "{row}");

    let hist = stdout(&gpsvmc(&["sample", cfg.to_str().unwrap(), "--n", "500"]));
    let total: u64 = hist
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().trim().parse::<u64>().unwrap())
        .sum();
    assert_eq!(total, 500, "{hist}");
}

#[test]
fn bad_config_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &CHAIN.replace("support = 2", "support = 0"));
    let o = gpsvmc(&["run", cfg.to_str().unwrap()]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("support"));
}
