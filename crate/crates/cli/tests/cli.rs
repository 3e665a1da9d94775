use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(config: &str, dir: &Path, extra: &[&str]) -> Output {
    let path = dir.join("config.json");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_born-dispersion"))
        .args(extra)
        .arg("run")
        .arg(&path)
        .env_remove("BORN_DISPERSION_OUT")
        .output()
        .unwrap()
}

#[test]
fn chart_selftest_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = format!(r#"{{"experiment": "chart-selftest", "out_dir": {:?}}}"#, out);
    let o = run(&config, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("max round-trip error"));
    assert!(out.join("chart_selftest.json").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn missing_beta_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let config = format!(
        r#"{{"experiment": "lemma52", "n": 3, "theta": [-1, 0, 0], "grid": {{"N": 64, "L": 16}},
            "ray": {{"direction": [1, 0, 0], "t_min": 8, "t_max": 48, "count": 16}}, "out_dir": {:?}}}"#,
        dir.path().join("out")
    );
    let o = run(&config, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("beta"));
}

#[test]
fn malformed_config_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(r#"{"experiment": "gbeta", "grid": {"N": "many", "L": 16}}"#, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("grid.N"));
}

#[test]
fn lemma52_writes_samples_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let config = format!(
        r#"{{"experiment": "lemma52", "n": 3, "beta": 1.0, "theta": [-1, 0, 0], "grid": {{"N": 128, "L": 16}},
            "ray": {{"direction": [1, 0, 0], "t_min": 8, "t_max": 48, "count": 16}}, "out_dir": {:?}}}"#,
        out
    );
    let o = run(&config, dir.path(), &["--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("lemma52_samples.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
    assert!(csv.starts_with("t,value"));
    let verdict: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("lemma52_verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["pass"], serde_json::Value::Bool(true));
}

#[test]
fn out_dir_can_be_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("elsewhere");
    let path = dir.path().join("config.json");
    fs::write(&path, r#"{"experiment": "bounds-table", "n": 3, "beta": 1.0, "out_dir": "ignored"}"#).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_born-dispersion"))
        .arg("run")
        .arg(&path)
        .env("BORN_DISPERSION_OUT", &target)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let table = fs::read_to_string(target.join("bounds_table.csv")).unwrap();
    assert!(table.starts_with("beta,m,thm11_max,thm13_sup,alpha0"));
    assert!(target.join("bounds_report.json").exists());
}

#[test]
fn failed_verdict_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    // Below the bump width the profile is flat, far from the predicted power law.
    let config = format!(
        r#"{{"experiment": "gbeta", "n": 2, "beta": 1.0, "grid": {{"N": 64, "L": 8}},
            "fit_window": [0.1, 4.0], "out_dir": {:?}}}"#,
        out
    );
    let o = run(&config, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("gbeta-decay: FAIL"));
    assert!(out.join("gbeta_profile.csv").exists());
}
