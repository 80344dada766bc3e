use std::path::Path;
use std::process::{Command, Output};

fn run(dir: &Path, job: &str, config: &str, extra: &[&str]) -> Output {
    let path = dir.join("config.toml");
    std::fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_snumlab"))
        .arg(job)
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

const RATES: &str = "gamma = [[2, 2]]\n[grid]\ns1 = [\"3\"]\np1 = [\"4/3\"]\np2 = [\"4\"]\n";

#[test]
fn writes_both_formats_by_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "rates", RATES, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("out/rates.csv").exists());
    assert!(dir.path().join("out/rates.json").exists());
}

#[test]
fn format_flag_selects_one_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "rates", RATES, &["--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("out/rates.csv").exists());
    assert!(!dir.path().join("out/rates.json").exists());
}

#[test]
fn bad_config_exits_with_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), "rates", "gamma = [[2, 2]]\nsede = 1\n", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sede"));
}

#[test]
fn boundary_grid_exits_with_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = "gamma = [[2, 2]]\n[grid]\ns1 = [\"5\"]\np1 = [\"4/3\"]\np2 = [\"8/3\"]\n";
    assert_eq!(run(dir.path(), "rates", text, &[]).status.code(), Some(3));
}

#[test]
fn mixed_grid_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let text = "gamma = [[2, 2]]\n[grid]\ns1 = [\"5\"]\np1 = [\"4/3\"]\np2 = [\"8/3\", \"4\"]\n";
    let out = run(dir.path(), "rates", text, &[]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn seed_override_lands_in_reports() {
    let dir = tempfile::tempdir().unwrap();
    run(dir.path(), "rates", RATES, &["--seed", "42", "--format", "csv"]);
    let csv = std::fs::read_to_string(dir.path().join("out/rates.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("snumlab/1,42,0,"));
}
