use std::path::Path;
use std::process::{Command, Output};

use wxscen::pipeline::synthetic::{self, SyntheticSpec};

fn wxscen(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wxscen")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn write_weather(dir: &Path, days: usize) {
    let d = synthetic::generate(&SyntheticSpec::reference(24 * days, 5.0), 3).unwrap();
    let mut bytes = Vec::new();
    d.write_csv(&mut bytes).unwrap();
    std::fs::write(dir.join("weather.csv"), bytes).unwrap();
    std::fs::write(dir.join("config.json"), r#"{"n_scenarios": 200, "n_per_cell": 20}"#).unwrap();
}

fn run_pipeline(dir: &Path, out: &str) {
    let steps: [&[&str]; 7] = [
        &["ingest", "weather.csv"],
        &["fit"],
        &["tree"],
        &["generate", "--mode", "normal"],
        &["generate", "--mode", "anomalous"],
        &["ut"],
        &["validate"],
    ];
    for step in steps {
        let mut args = step.to_vec();
        args.extend(["--out", out, "--seed", "42", "--config", "config.json"]);
        let o = wxscen(dir, &args);
        assert_eq!(code(&o), 0, "{step:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

fn listing(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn full_pipeline_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    write_weather(dir.path(), 300);
    // Same output directory both times: models.json records its input path.
    run_pipeline(dir.path(), "out");
    let a = listing(&dir.path().join("out"));
    std::fs::remove_dir_all(dir.path().join("out")).unwrap();
    run_pipeline(dir.path(), "out");
    let b = listing(&dir.path().join("out"));
    let names: Vec<&str> = a.iter().map(|f| f.0.as_str()).collect();
    for f in ["dataset.csv", "models.json", "tree.csv", "normal_reduced.csv", "anomalous.json", "ut.json", "validation.json"] {
        assert!(names.contains(&f), "{f} missing from {names:?}");
    }
    let differing: Vec<&str> = a.iter().zip(&b).filter(|(x, y)| x != y).map(|(x, _)| x.0.as_str()).collect();
    assert_eq!(a.len(), b.len());
    assert!(differing.is_empty(), "differ: {differing:?}");
}

#[test]
fn tree_prints_sixteen_cells() {
    let dir = tempfile::tempdir().unwrap();
    write_weather(dir.path(), 200);
    assert_eq!(code(&wxscen(dir.path(), &["fit", "weather.csv"])), 0);
    let o = wxscen(dir.path(), &["tree"]);
    assert_eq!(code(&o), 0);
    let csv = std::fs::read_to_string(dir.path().join("out/tree.csv")).unwrap();
    assert_eq!(csv.lines().count(), 17);
    assert!(!o.stdout.is_empty());
}

#[test]
fn missing_models_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = wxscen(dir.path(), &["tree"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("models.json"));
    assert_eq!(code(&wxscen(dir.path(), &["ingest", "nope.csv"])), 4);
}

#[test]
fn validate_needs_generated_scenarios() {
    let dir = tempfile::tempdir().unwrap();
    write_weather(dir.path(), 200);
    assert_eq!(code(&wxscen(dir.path(), &["ingest", "weather.csv"])), 0);
    assert_eq!(code(&wxscen(dir.path(), &["fit"])), 0);
    let o = wxscen(dir.path(), &["validate", "--seed", "1"]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("normal_raw"));
}

#[test]
fn validation_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    write_weather(dir.path(), 200);
    assert_eq!(code(&wxscen(dir.path(), &["fit", "weather.csv"])), 0);
    // no seed anywhere
    assert_eq!(code(&wxscen(dir.path(), &["generate"])), 2);
    std::fs::write(dir.path().join("bad.json"), r#"{"n_scenarios": 0}"#).unwrap();
    assert_eq!(code(&wxscen(dir.path(), &["tree", "--config", "bad.json"])), 2);
    std::fs::write(dir.path().join("typo.json"), r#"{"n_scenario": 10}"#).unwrap();
    assert_eq!(code(&wxscen(dir.path(), &["tree", "--config", "typo.json"])), 2);
    assert_eq!(code(&wxscen(dir.path(), &["generate", "--mode", "sideways", "--seed", "1"])), 2);
    assert_eq!(code(&wxscen(dir.path(), &["ingest", "weather.csv", "--from", "2015-13-01"])), 2);
    std::fs::write(dir.path().join("garbled.csv"), "time,speed\n1,2\n").unwrap();
    assert_eq!(code(&wxscen(dir.path(), &["ingest", "garbled.csv"])), 2);
}

#[test]
fn fit_failure_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // One day of data: too few records per hour and no wet tail to fit.
    let mut csv = String::from("timestamp,wind_ms,ghi_kwm2,precip_mmh\n");
    for h in 0..24 {
        csv.push_str(&format!("2021-07-01T{h:02}:00:00Z,{},{},0\n", 3.0 + h as f64, 0.0));
    }
    std::fs::write(dir.path().join("day.csv"), csv).unwrap();
    let o = wxscen(dir.path(), &["fit", "day.csv"]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn ut_with_explicit_moments_needs_no_models() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("m.json"), r#"{"mean": [9.0, 0.6], "covariance": [[4.0, 0.0], [0.0, 0.01]]}"#).unwrap();
    let o = wxscen(dir.path(), &["ut", "--input", "m.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("out/ut.json").is_file());
    std::fs::write(dir.path().join("neg.json"), r#"{"mean": [9.0, 0.6], "covariance": [[-4.0, 0.0], [0.0, 0.01]]}"#).unwrap();
    assert_eq!(code(&wxscen(dir.path(), &["ut", "--input", "neg.json"])), 3);
}
