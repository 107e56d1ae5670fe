//! End-to-end exercises of the `filmlab` binary: artifact layout, the
//! documented exit codes, and byte-level reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn filmlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_filmlab"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

const DECAY_CONFIG: &str = r#"
[spec]
a = 3.141592653589793
p = 3.0
n_modes = 64

[datum]
family = "cosine_combo"
modes = [[1, 0.5]]

[stepper]
dt_init = 1e-4
dt_max = 0.01
t_horizon = 0.5
sample_stride = 1

[outputs]
dir = "run-out"
"#;

#[test]
fn simulate_writes_the_documented_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "decay.toml", DECAY_CONFIG);
    let out = filmlab(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));

    let run_dir = tmp.path().join("run-out");
    let csv = std::fs::read_to_string(run_dir.join("series.csv")).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header, "t,dt,mass,l2sq,lp1,linf,h2sq,J,I,ut_l2sq,M,energy_residual");
    assert!(csv.lines().count() > 10);
    assert!(csv.is_ascii());

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(run_dir.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["schema"], 1);
    assert_eq!(summary["outcome"]["kind"], "GlobalHorizonReached");
    assert!(summary["extras"]["classification"]["branch"].is_string());
    assert!(run_dir.join("plot.py").exists());
}

#[test]
fn identical_configs_reproduce_byte_identical_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "decay.toml", DECAY_CONFIG);
    let run_dir = tmp.path().join("run-out");

    assert!(filmlab(&["simulate", cfg.to_str().unwrap()], tmp.path()).status.success());
    let csv_first = std::fs::read(run_dir.join("series.csv")).unwrap();
    let summary_first = std::fs::read(run_dir.join("summary.json")).unwrap();

    assert!(filmlab(&["simulate", cfg.to_str().unwrap()], tmp.path()).status.success());
    assert_eq!(csv_first, std::fs::read(run_dir.join("series.csv")).unwrap());
    assert_eq!(summary_first, std::fs::read(run_dir.join("summary.json")).unwrap());
}

#[test]
fn blowup_summary_records_s_minus_entry_at_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "blowup.toml",
        r#"
[spec]
a = 3.141592653589793
p = 3.0

[datum]
family = "cosine_combo"
modes = [[1, 2.0]]

[stepper]
dt_init = 1e-6
dt_min = 1e-20
dt_max = 0.05
rel_tol = 1e-6
t_horizon = 10.0
u_max = 1e8

[outputs]
dir = "blowup-out"
"#,
    );
    let out = filmlab(&["simulate", cfg.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("blowup-out/summary.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(summary["outcome"]["kind"], "BlowUp");
    assert_eq!(summary["s_minus_entry"], 0.0);
    assert!(summary["outcome"]["blowup_time_estimate"].as_f64().unwrap() > 0.0);
    assert_eq!(summary["extras"]["classification"]["branch"], "LowEnergyBlowUp");
    assert_eq!(summary["extras"]["classification"]["predicted"], "BlowUp");
}

#[test]
fn config_errors_exit_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    // unknown key
    let bad = write_config(
        tmp.path(),
        "bad.toml",
        r#"
[spec]
a = 3.14
p = 3.0
typo_key = 1

[datum]
family = "cosine_combo"
modes = [[1, 0.5]]

[outputs]
dir = "x"
"#,
    );
    let out = filmlab(&["simulate", bad.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    // missing file
    let out = filmlab(&["simulate", "no-such-file.toml"], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    // invalid stepper values
    let bad_stepper = write_config(
        tmp.path(),
        "bad_stepper.toml",
        r#"
[spec]
a = 3.14
p = 3.0

[datum]
family = "cosine_combo"
modes = [[1, 0.5]]

[stepper]
dt_min = 0.0

[outputs]
dir = "x"
"#,
    );
    let out = filmlab(&["simulate", bad_stepper.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));

    // a datum that validates to zero is a config mistake, not a crash
    let zero_datum = write_config(
        tmp.path(),
        "zero.toml",
        r#"
[spec]
a = 3.14
p = 3.0

[datum]
family = "cosine_combo"
modes = [[1, 0.0]]

[outputs]
dir = "x"
"#,
    );
    let out = filmlab(&["simulate", zero_datum.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_suite_exits_with_code_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = filmlab(&["verify", "no-such-suite"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown suite"));
}

#[test]
fn welldepth_subcommand_reports_the_estimate() {
    let tmp = tempfile::tempdir().unwrap();
    let out = filmlab(
        &["welldepth", "--a", "3.141592653589793", "--p", "3.0", "--modes", "32"],
        tmp.path(),
    );
    assert!(out.status.success());
    let est: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let d_hat = est["d_hat"].as_f64().unwrap();
    assert!(d_hat > 0.0 && d_hat <= std::f64::consts::PI / 6.0 + 1e-6);
    assert_eq!(est["n_modes_used"], 32);
}

#[test]
fn lambda_alpha_subcommand_respects_the_slice() {
    let tmp = tempfile::tempdir().unwrap();
    let out = filmlab(
        &["lambda-alpha", "--alpha", "0.6", "--a", "3.141592653589793", "--p", "3.0", "--modes", "32"],
        tmp.path(),
    );
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let est: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(est["lambda_alpha_hat"].as_f64().unwrap() > 0.0);
    // radius = √(2α(p+1)/(p−1)) = √(4·0.6)
    let radius = est["radius"].as_f64().unwrap();
    assert!((radius - (2.4f64).sqrt()).abs() <= 1e-12);
}

#[test]
fn sweep_fans_runs_into_their_own_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "sweep.toml",
        r#"
[spec]
a = 3.141592653589793
p = 3.0

[stepper]
dt_init = 1e-4
dt_max = 0.01
t_horizon = 0.2

[outputs]
dir = "sweep-out"

[[runs]]
name = "small"
[runs.datum]
family = "cosine_combo"
modes = [[1, 0.4]]

[[runs]]
[runs.datum]
family = "cosine_combo"
modes = [[2, 0.3]]
"#,
    );
    let out = filmlab(&["sweep", cfg.to_str().unwrap()], tmp.path());
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(tmp.path().join("sweep-out/small/series.csv").exists());
    assert!(tmp.path().join("sweep-out/run_001/series.csv").exists());
}
