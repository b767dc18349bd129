use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_boundedrenew"))
}

fn run_with(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = bin();
    cmd.args(args).env_remove("BOUNDEDRENEW_THREADS");
    if let Some(n) = threads {
        cmd.env("BOUNDEDRENEW_THREADS", n);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const POISSON: &str = r#"{
  "name": "poisson",
  "process": "A",
  "nc": {"kind": "exponential", "rate": 0.5},
  "cr": {"kind": "exponential", "rate": 0.1},
  "grid": {"t_max": 10.0, "n_steps": 100},
  "estimators": ["exact", "standalone", {"simulate": {"runs": 4000, "seed": 9}}]
}"#;

fn rows(csv: &str, estimator: &str) -> Vec<(f64, f64)> {
    csv.lines()
        .skip(1)
        .filter_map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            (f[1] == estimator).then(|| (f[0].parse().unwrap(), f[2].parse().unwrap()))
        })
        .collect()
}

#[test]
fn run_writes_closed_form_rows() {
    let dir = TempDir::new().unwrap();
    let file = write(dir.path(), "s.json", POISSON);
    let out = run_with(&["run", &file], None);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("t,estimator,value,ci_low,ci_high\n"));
    let exact = rows(&csv, "exact");
    assert_eq!(exact.len(), 101);
    for (t, v) in &exact {
        assert!((v - 5.0 * (1.0 - (-0.1 * t).exp())).abs() < 1e-3, "t={t} v={v}");
    }
    for (t, v) in rows(&csv, "standalone") {
        assert!((v - 0.5 * t).abs() < 1e-4);
    }
    let sim_lines: Vec<&str> = csv.lines().filter(|l| l.contains(",simulate,")).collect();
    assert_eq!(sim_lines.len(), 101);
    assert!(sim_lines.iter().all(|l| !l.ends_with(",,")));
}

#[test]
fn csv_is_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let file = write(dir.path(), "s.json", POISSON);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let c = dir.path().join("c.csv");
    for (path, threads) in [(&a, "1"), (&b, "4"), (&c, "4")] {
        let out = run_with(&["run", &file, "--out", path.to_str().unwrap()], Some(threads));
        assert!(out.status.success());
        assert!(out.stdout.is_empty());
    }
    let a = fs::read(a).unwrap();
    assert_eq!(a, fs::read(b).unwrap());
    assert_eq!(a, fs::read(c).unwrap());
}

#[test]
fn malformed_input_exits_with_two() {
    let dir = TempDir::new().unwrap();
    let broken = write(dir.path(), "broken.json", "{ not json");
    let unknown_field = write(dir.path(), "extra.json", &POISSON.replace("\"name\"", "\"colour\": 1, \"name\""));
    let bad_param = write(dir.path(), "bad.json", &POISSON.replace("\"rate\": 0.5", "\"rate\": -0.5"));
    for args in [
        vec!["run", broken.as_str()],
        vec!["run", unknown_field.as_str()],
        vec!["run", bad_param.as_str()],
        vec!["run", "/nonexistent/scenario.json"],
        vec!["run", "--preset", "no-such-preset"],
        vec!["presets", "no-such-preset"],
        vec!["run"],
    ] {
        let out = run_with(&args, None);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));
    }
    assert_eq!(run_with(&["run", &broken], Some("zero")).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_with_three() {
    let dir = TempDir::new().unwrap();
    let file = write(
        dir.path(),
        "overflow.json",
        r#"{"name": "overflow", "process": "A_MR",
            "nc": {"kind": "rayleigh", "lambda": 1e200},
            "cr": {"kind": "exponential", "rate": 0.1},
            "grid": {"t_max": 10.0, "n_steps": 100},
            "estimators": ["exact"]}"#,
    );
    let out = run_with(&["run", &file], None);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("underflow"));
}

#[test]
fn presets_list_and_round_trip() {
    let out = run_with(&["presets"], None);
    assert!(out.status.success());
    let names: Vec<String> = String::from_utf8(out.stdout).unwrap().lines().map(String::from).collect();
    assert_eq!(names, ["blade-motor-A", "blade-motor-AMR", "blade-hss-B", "blade-hss-BMR"]);
    for name in &names {
        let out = run_with(&["presets", name], None);
        assert!(out.status.success());
        let json = String::from_utf8(out.stdout).unwrap();
        let parsed = boundedrenew::Scenario::from_json(&json).unwrap();
        assert_eq!(parsed, boundedrenew::scenario::preset(name).unwrap());
    }
}

#[test]
fn compare_reports_pairs() {
    let dir = TempDir::new().unwrap();
    let file = write(dir.path(), "s.json", POISSON);
    let out = run_with(&["compare", &file], None);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("exact"));
    assert!(text.contains("standalone"));
    assert!(text.contains("simulate"));
}
