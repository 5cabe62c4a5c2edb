use std::sync::OnceLock;

use wxscen::engine::read_scenario_set;
use wxscen::marginal::MarginalModel;
use wxscen::pipeline::synthetic::{self, SyntheticSpec};
use wxscen::pipeline::*;
use wxscen::ut::InputMoments;
use wxscen::Error;

fn config() -> PipelineConfig {
    PipelineConfig { seed: Some(2024), ..PipelineConfig::default() }
}

fn dataset() -> &'static WeatherDataset {
    static D: OnceLock<WeatherDataset> = OnceLock::new();
    D.get_or_init(|| synthetic::generate(&SyntheticSpec::reference(24 * 1000, 5.0), 11).unwrap())
}

fn bundle() -> &'static ModelBundle {
    static B: OnceLock<ModelBundle> = OnceLock::new();
    B.get_or_init(|| fit_bundle(dataset(), &config()).unwrap())
}

#[test]
fn ingest_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let mut csv = String::from("timestamp,wind_ms,ghi_kwm2,precip_mmh\n");
    for h in 0..24 {
        csv.push_str(&format!("2021-07-01 {h:02}:00,{},{},{}\n", 4.0 + h as f64 * 0.5, 0.02 * h as f64, 0.0));
    }
    let path = dir.path().join("raw.csv");
    std::fs::write(&path, csv).unwrap();
    let d = WeatherDataset::load(&path, DateFilter::default()).unwrap();
    assert_eq!(d.records.len(), 24);
    let out = cmd_ingest(&d).unwrap();
    out.commit(dir.path()).unwrap();
    let again = WeatherDataset::load(&dir.path().join("dataset.csv"), DateFilter::default()).unwrap();
    assert_eq!(again.records, d.records);
    let leftovers: Vec<_> = std::fs::read_dir(dir.path())
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().contains(".tmp"))
        .collect();
    assert!(leftovers.is_empty());
    assert!(matches!(WeatherDataset::load(&dir.path().join("nope.csv"), DateFilter::default()), Err(Error::Io { .. })));
}

#[test]
fn wind_gev_round_trip_within_five_percent() {
    let mut spec = SyntheticSpec::reference(100_000, 5.0);
    spec.calm_floor = false;
    let d = synthetic::generate(&spec, 5).unwrap();
    let b = fit_bundle(&d, &config()).unwrap();
    let MarginalModel::Gev(g) = b.wind.model else { panic!("{:?}", b.wind.model) };
    let truth = synthetic::reference_wind();
    for (fit, want) in [(g.location, truth.location), (g.scale, truth.scale), (g.shape, truth.shape)] {
        assert!(((fit - want) / want).abs() < 0.05, "{g:?}");
    }
}

#[test]
fn independent_weather_gives_near_zero_theta() {
    let mut spec = SyntheticSpec::reference(100_000, 0.0);
    spec.wet_probability = 0.6;
    let d = synthetic::generate(&spec, 6).unwrap();
    let b = fit_bundle(&d, &config()).unwrap();
    assert!(b.copula.theta.abs() < 0.1, "theta {}", b.copula.theta);
}

#[test]
fn bundle_refit_and_reload_are_exact() {
    let (b, out) = cmd_fit(dataset(), &config()).unwrap();
    let (_, again) = cmd_fit(dataset(), &config()).unwrap();
    assert_eq!(out, again);
    let text = std::str::from_utf8(out.get("models.json").unwrap()).unwrap();
    assert_eq!(ModelBundle::from_json(text).unwrap(), b);
    assert_eq!(b.hourly.len(), 24);
    assert!(b.copula.theta > 3.0, "{}", b.copula.theta);
}

#[test]
fn tree_has_sixteen_rows_summing_to_one() {
    let (tree, out) = cmd_tree(bundle(), &config()).unwrap();
    assert_eq!(tree.cells.len(), 16);
    let total: f64 = tree.cells.iter().map(|c| 100.0 * c.probability).sum();
    assert!((total - 100.0).abs() < 1e-6);
    let csv = std::str::from_utf8(out.get("tree.csv").unwrap()).unwrap();
    assert_eq!(csv.lines().count(), 17);
    assert_eq!(cmd_tree(bundle(), &config()).unwrap().1, out);
}

#[test]
fn normal_generation_reduces_to_five() {
    let (g, out) = cmd_generate(bundle(), &config(), GenerateMode::Normal).unwrap();
    assert_eq!(g.raw[0].len(), 2000);
    assert_eq!(g.reduced.len(), 1);
    let reduced = &g.reduced[0].1;
    assert_eq!(reduced.len(), 5);
    assert!((reduced.total_weight() - 1.0).abs() < 1e-12);
    let back = read_scenario_set(out.get("normal_reduced.csv").unwrap(), out.get("normal_reduced.json").unwrap()).unwrap();
    assert_eq!(&back, reduced);
    let (_, again) = cmd_generate(bundle(), &config(), GenerateMode::Normal).unwrap();
    assert_eq!(out.get("normal_raw.csv"), again.get("normal_raw.csv"));
    assert_eq!(out, again);
}

#[test]
fn independent_reduction_writes_two_sets() {
    let c = PipelineConfig { reduction: ReductionMode::Independent, n_scenarios: 200, ..config() };
    let (g, out) = cmd_generate(bundle(), &c, GenerateMode::Normal).unwrap();
    assert_eq!(g.reduced.len(), 2);
    assert!(out.get("normal_reduced_wind.csv").is_some() && out.get("normal_reduced_pv.csv").is_some());
}

#[test]
fn anomalous_generation_matches_tree_weights() {
    let (tree, _) = cmd_tree(bundle(), &config()).unwrap();
    let (g, out) = cmd_generate(bundle(), &config(), GenerateMode::Anomalous).unwrap();
    let set = &g.reduced[0].1;
    assert_eq!(set.len(), 16);
    for (s, cell) in set.scenarios.iter().zip(&tree.cells) {
        assert_eq!(s.id, cell.scenario_id);
        assert_eq!(s.weight, cell.probability);
    }
    let energy = g.energy.unwrap();
    assert_eq!(energy.scenarios.len(), 16);
    assert!(out.get("energy_anomalous.json").is_some());
    let (_, again) = cmd_generate(bundle(), &config(), GenerateMode::Anomalous).unwrap();
    assert_eq!(out, again);
}

#[test]
fn per_cell_mode_keeps_every_draw() {
    let c = PipelineConfig { n_per_cell: 12, ..config() };
    let (g, out) = cmd_generate(bundle(), &c, GenerateMode::PerCell).unwrap();
    assert_eq!(g.raw.len(), 16);
    assert!(g.raw.iter().all(|s| s.len() == 12));
    assert_eq!(out.0.len(), 32);
}

#[test]
fn sampling_commands_need_a_seed() {
    let c = PipelineConfig::default();
    let e = cmd_generate(bundle(), &c, GenerateMode::Normal).unwrap_err();
    assert_eq!(e.exit_code(), wxscen::ExitCode::Validation);
}

#[test]
fn ut_command() {
    let c = config();
    let point = InputMoments::diagonal(vec![7.5, 0.5], &[0.0, 0.0]);
    let (r, _) = cmd_ut(None, &c, Some(point)).unwrap();
    let out = &r.cases[0].output;
    for (got, want) in out.mean.iter().zip([c.turbine.power(7.5), c.pv.power(0.5)]) {
        assert!((got - want).abs() < 1e-9 * want, "{got} vs {want}");
    }
    assert!(out.covariance.iter().flatten().all(|v| v.abs() < 1e-9));
    let (hourly, _) = cmd_ut(Some(bundle()), &c, None).unwrap();
    assert_eq!(hourly.cases.len(), 24);
    assert!(matches!(cmd_ut(None, &c, None), Err(Error::MissingArtifact(_))));
}

#[test]
fn validation_report() {
    let c = config();
    let raw = normal_set(bundle(), &c, c.seed.unwrap()).unwrap();
    let (report, out) = cmd_validate(bundle(), dataset(), &raw, &c).unwrap();
    let names: Vec<&str> = report.qq.iter().map(|q| q.name.as_str()).collect();
    assert_eq!(names, ["wind_history", "pv_history", "wind_regenerated", "pv_regenerated"]);
    assert!(report.qq.iter().all(|q| q.r_squared.is_finite()));
    assert!(report.qq[3].r_squared >= 0.99);
    assert_eq!(report.precip_comparison.rank_of(wxscen::marginal::ModelKind::GevGpSplice), Some(1));
    for f in ["validation.json", "ecdf_wind.csv", "pdf_precip.csv", "qq_pv_history.csv"] {
        assert!(out.get(f).is_some(), "{f}");
    }
    assert_eq!(cmd_validate(bundle(), dataset(), &raw, &c).unwrap().1, out);
}

#[test]
fn missing_artifacts_are_named() {
    let dir = tempfile::tempdir().unwrap();
    match load_bundle(&dir.path().join("models.json")) {
        Err(Error::MissingArtifact(p)) => assert!(p.ends_with("models.json")),
        other => panic!("{other:?}"),
    }
    assert_eq!(load_scenario_set(dir.path(), "normal_raw").unwrap_err().exit_code(), wxscen::ExitCode::Io);
}
