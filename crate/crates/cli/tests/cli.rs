use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
}

fn ioeco(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ioeco"))
        .env("IOECO_OUTPUT_ROOT", root)
        .args(args)
        .output()
        .expect("spawn ioeco")
}

fn json(path: PathBuf) -> Value {
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    serde_json::from_str(&text).expect("json")
}

fn synthetic() -> String {
    fixture("synthetic4.toml").to_str().unwrap().to_string()
}

/// Writes a config into `dir` pointing at the synthetic fixtures.
fn config_with(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(format!("{name}.toml"));
    let text = format!(
        "params_path = {:?}\nscale = 8\n{body}",
        fixture("synthetic4_params.txt").to_str().unwrap()
    );
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn single_run_writes_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ioeco(
        tmp.path(),
        &["run", "--config", &synthetic(), "--seed", "5489"],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let dir = tmp.path().join("synthetic4");
    for f in ["monthly.csv", "calibration_trace.csv", "summary.json"] {
        assert!(dir.join("seed-5489").join(f).is_file(), "missing {f}");
    }
    assert!(dir.join("metadata.json").is_file());
    let summary = json(dir.join("seed-5489/summary.json"));
    assert_eq!(summary["converged"], true);
    assert!(summary["growth"]["growth"].is_f64());
    assert!(summary["growth"]["r2"].is_f64());
    let monthly = std::fs::read_to_string(dir.join("seed-5489/monthly.csv")).unwrap();
    assert!(monthly.starts_with("month,phase,"));
}

#[test]
fn missing_table_is_an_input_error_without_output() {
    let tmp = tempfile::tempdir().unwrap();
    let config = config_with(tmp.path(), "missing", "sam_path = \"nowhere.csv\"\n");
    let root = tmp.path().join("out");
    let out = ioeco(&root, &["run", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nowhere.csv"));
    assert!(!root.exists());
}

#[test]
fn bad_config_names_the_line() {
    let tmp = tempfile::tempdir().unwrap();
    let config = config_with(
        tmp.path(),
        "bad",
        "sam_path = \"x.csv\"\nseeds = \"many\"\n",
    );
    let out = ioeco(tmp.path(), &["run", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        String::from_utf8_lossy(&out.stderr).contains("line 4"),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ioeco(
        tmp.path(),
        &["run", "--config", &synthetic(), "--frobnicate"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn calibration_timeout_exits_3() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ioeco(
        tmp.path(),
        &[
            "run",
            "--config",
            &synthetic(),
            "--seed",
            "5489",
            "--timeout-months",
            "25",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let summary = json(tmp.path().join("synthetic4/seed-5489/summary.json"));
    assert_eq!(summary["converged"], false);
}

#[test]
fn single_seed_ensemble_has_no_spread() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ioeco(
        tmp.path(),
        &[
            "ensemble",
            "--config",
            &synthetic(),
            "--seed",
            "42",
            "--jobs",
            "1",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let summary = json(tmp.path().join("synthetic4/ensemble.json"));
    assert_eq!(summary["stats"]["kept_seeds"], serde_json::json!([42]));
    assert!(summary["stats"]["sd"].is_null());
    assert!(summary["stats"]["sem"].is_null());
}

#[test]
fn ensemble_without_survivors_exits_4() {
    let tmp = tempfile::tempdir().unwrap();
    let out = ioeco(
        tmp.path(),
        &[
            "ensemble",
            "--config",
            &synthetic(),
            "--seed",
            "1",
            "--seed",
            "2",
            "--timeout-months",
            "25",
        ],
    );
    assert_eq!(out.status.code(), Some(4));
    let summary = json(tmp.path().join("synthetic4/ensemble.json"));
    assert!(summary["stats"].is_null());
    assert_eq!(summary["filter"]["excluded"].as_array().unwrap().len(), 2);
}

#[test]
fn shock_timeline_run_completes() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fixture("synthetic4_shock.toml");
    let out = ioeco(
        tmp.path(),
        &[
            "run",
            "--config",
            config.to_str().unwrap(),
            "--seed",
            "5489",
        ],
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn panel_scores_published_forecasts() {
    let tmp = tempfile::tempdir().unwrap();
    let config = fixture("austria_panel.toml");
    let out = ioeco(tmp.path(), &["panel", "--config", config.to_str().unwrap()]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = json(tmp.path().join("austria_panel/panel.json"));
    let mae = report["all_years"]["mae"].as_f64().unwrap();
    assert!((mae - 1.22).abs() < 0.01);
    let normal = report["normal_years"]["mae"].as_f64().unwrap();
    assert!((normal - 0.42).abs() < 0.01);
    assert!(tmp.path().join("austria_panel/panel.csv").is_file());
    assert!(String::from_utf8_lossy(&out.stdout).contains("2019"));
}
