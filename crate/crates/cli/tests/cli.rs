use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e")
}

fn techlev(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_techlev"));
    for (k, _) in std::env::vars().filter(|(k, _)| k.starts_with("TECHLEV_")) {
        cmd.env_remove(k);
    }
    cmd.args(args).envs(envs.iter().copied()).output().unwrap()
}

fn run_all(out: &Path, extra: &[&str]) -> Output {
    let config = fixture().join("config.json");
    let mut args = vec!["--config", config.to_str().unwrap(), "--output", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    args.extend(["all", "--deterministic"]);
    techlev(&args, &[])
}

fn snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap())
        .map(|e| (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn missing_manifest_is_a_config_error() {
    let out = tempfile::tempdir().unwrap();
    let o = techlev(&["--output", out.path().to_str().unwrap(), "measure"], &[]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(std::fs::read_dir(out.path()).unwrap().count(), 0);
}

#[test]
fn unknown_config_key_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"manifest": "x.json"}"#).unwrap();
    let o = techlev(&["--config", cfg.to_str().unwrap(), "measure"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_without_measure_is_a_data_error() {
    let out = tempfile::tempdir().unwrap();
    let o = techlev(&["--output", out.path().to_str().unwrap(), "analyze"], &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("techlev measure"));
}

#[test]
fn zero_cell_reports_stats_error_as_json() {
    let out = tempfile::tempdir().unwrap();
    assert!(run_all(out.path(), &[]).status.success());
    std::fs::remove_file(out.path().join("odds.json")).unwrap();
    let o = techlev(
        &["--output", out.path().to_str().unwrap(), "stats", "odds"],
        &[("TECHLEV_LAMBDA_SMALL", "1e12")],
    );
    assert_eq!(o.status.code(), Some(4));
    let line = String::from_utf8(o.stdout).unwrap();
    let report: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
    assert_eq!(report["error"], "zero_cell");
    assert!(report["fisher_p"].as_f64().unwrap() <= 1.0);
    assert!(!out.path().join("odds.json").exists());
}

#[test]
fn empty_plot_writes_nothing() {
    let out = tempfile::tempdir().unwrap();
    std::fs::write(out.path().join("instances.csv"), "gav,released,own_loc,dep_loc,own_vulns,dep_vulns\n").unwrap();
    let o = techlev(&["--output", out.path().to_str().unwrap(), "plot", "leverage_scatter"], &[]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!out.path().join("leverage_scatter.svg").exists());
    assert!(!out.path().join("leverage_scatter.csv").exists());
}

#[test]
fn rerun_is_idempotent_and_jobs_do_not_change_output() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(run_all(a.path(), &[]).status.success());
    let first = snapshot(a.path());
    assert!(run_all(a.path(), &[]).status.success());
    assert_eq!(snapshot(a.path()), first);
    assert!(run_all(b.path(), &["--jobs", "1"]).status.success());
    assert_eq!(snapshot(b.path()), first);
}

#[test]
fn timestamp_comment_only_without_deterministic() {
    let out = tempfile::tempdir().unwrap();
    let config = fixture().join("config.json");
    let o = techlev(&["--config", config.to_str().unwrap(), "--output", out.path().to_str().unwrap(), "all"], &[]);
    assert!(o.status.success());
    let svg = std::fs::read_to_string(out.path().join("kde_theta.svg")).unwrap();
    assert!(svg.contains("<!-- generated "));
}
