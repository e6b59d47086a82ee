use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = r#"
seed = 5

[[chern]]
name = "c"
dims = [1, 2]
random_cases = 3

[[gma]]
name = "g"
n = 1
pts = 16
analytic = true
alphas = [{ k = 1, c = 1.0, eta = { modes = [{ k = [1, 0], amp = 0.01 }] } }]

[[moment]]
name = "m"
n = 1
pts = 8
configs = 2

[[hitchin]]
name = "h"
phi = "zero"
pts = 8
k = 2
mode_cap = 1
configs = 1
"#;

fn lab(args: &[&str], dir: &Path, config: &str) -> Output {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_prequant-lab"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .env_remove("PREQUANT_LAB_OUT")
        .current_dir(dir)
        .output()
        .unwrap()
}

fn report(path: &Path) -> Value {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v.as_object_mut().unwrap().remove("timing");
    v
}

fn all_pass(v: &Value) -> bool {
    v["scenarios"].as_array().unwrap().iter().flat_map(|s| s["verdicts"].as_array().unwrap()).all(|v| v["pass"] == true)
}

#[test]
fn same_seed_gives_identical_reports() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let out = lab(&["all", "--out", "o"], d.path(), SMALL);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let ra = report(&a.path().join("o/all_seed5.json"));
    let rb = report(&b.path().join("o/all_seed5.json"));
    assert_eq!(ra, rb);
    assert_eq!(ra["schema_version"], 1);
    assert_eq!(ra["seed"], 5);
}

#[test]
fn seed_flag_overrides_config_and_changes_random_draws() {
    let d = tempfile::tempdir().unwrap();
    lab(&["verify-moment", "--out", "o"], d.path(), SMALL);
    lab(&["verify-moment", "--out", "o", "--seed", "6"], d.path(), SMALL);
    let r5 = report(&d.path().join("o/verify-moment_seed5.json"));
    let r6 = report(&d.path().join("o/verify-moment_seed6.json"));
    assert_eq!(r6["seed"], 6);
    assert_ne!(r5["scenarios"], r6["scenarios"]);
}

#[test]
fn empty_config_runs_nothing_and_succeeds() {
    let d = tempfile::tempdir().unwrap();
    let out = lab(&["all", "--out", "o"], d.path(), "");
    assert_eq!(out.status.code(), Some(0));
    let r = report(&d.path().join("o/all_seed0.json"));
    assert!(r["scenarios"].as_array().unwrap().is_empty());
}

#[test]
fn malformed_config_names_the_key() {
    let d = tempfile::tempdir().unwrap();
    let out = lab(&["all", "--out", "o"], d.path(), "[[gma]]\nname = \"g\"\nn = 1\npts = 16\nsteps = 3\n");
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("steps"), "{err}");
    assert!(!d.path().join("o").exists());

    let out = lab(&["all", "--out", "o"], d.path(), "[[gma]]\nname = \"g\"\nn = 3\npts = 16\nalphas = []\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gma[0].n"));
}

#[test]
fn exit_status_follows_verdicts() {
    let d = tempfile::tempdir().unwrap();
    let failing = "[[hitchin]]\nname = \"h\"\nphi = \"zero\"\npts = 8\nk = 2\nmode_cap = 1\nexpected_kernel = [9, 9]\n";
    let out = lab(&["hitchin-lab", "--out", "o"], d.path(), failing);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&d.path().join("o/hitchin-lab_seed0.json"));
    assert!(!all_pass(&r));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL hitchin/h/kernel_dims"));

    let out = lab(&["hitchin-lab", "--out", "o"], d.path(), SMALL);
    assert_eq!(out.status.code(), Some(0));
    assert!(all_pass(&report(&d.path().join("o/hitchin-lab_seed5.json"))));
}

#[test]
fn command_selects_scenario_kind() {
    let d = tempfile::tempdir().unwrap();
    lab(&["verify-chern", "--out", "o"], d.path(), SMALL);
    let r = report(&d.path().join("o/verify-chern_seed5.json"));
    let kinds: Vec<&str> = r["scenarios"].as_array().unwrap().iter().map(|s| s["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds, ["chern"]);
}

#[test]
fn series_are_written_as_csv() {
    let d = tempfile::tempdir().unwrap();
    lab(&["solve-gma", "--out", "o"], d.path(), SMALL);
    let text = std::fs::read_to_string(d.path().join("o/gma-g/residual_history_seed5.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("step,iter,residual"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert!(!rows.is_empty());
    assert!(rows.iter().all(|r| r.len() == 3));
    assert!(rows.last().unwrap()[2] < 1e-10);
}

#[test]
fn output_directory_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.toml");
    std::fs::write(&cfg, "").unwrap();
    let status = Command::new(env!("CARGO_BIN_EXE_prequant-lab"))
        .args(["verify-chern", "--config"])
        .arg(&cfg)
        .env("PREQUANT_LAB_OUT", d.path().join("env-out"))
        .current_dir(d.path())
        .status()
        .unwrap();
    assert!(status.success());
    assert!(d.path().join("env-out/verify-chern_seed0.json").exists());
}
