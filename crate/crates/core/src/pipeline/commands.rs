use std::str::FromStr;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::copula::{fit_theta, CopulaFit};
use crate::engine::{
    generate_anomalous, generate_normal, reduce, AnomalousWeather, DistanceMode, HourlyInputs, PlantSpecs, Scenario,
    ScenarioSet, WeatherTag,
};
use crate::error::{Error, Result};
use crate::gof::{gof_report, model_comparison, qq_data, write_ecdf_csv, write_pdf_overlay_csv, Comparison, GofReport, QqReference};
use crate::marginal::{fit_kind, BetaParams, FittedModel, ModelKind};
use crate::pipeline::config::{PipelineConfig, ReductionMode};
use crate::pipeline::ingest::WeatherDataset;
use crate::pipeline::Artifacts;
use crate::tree::{build_tree, ScenarioTree};
use crate::ut::{propagate_power, InputMoments, OutputMoments};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DataSummary {
    pub source: String,
    pub n_records: usize,
    pub n_wet: usize,
    pub first: DateTime<Utc>,
    pub last: DateTime<Utc>,
}

/// Everything later commands need from the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub wind: FittedModel,
    pub precip: FittedModel,
    pub copula: CopulaFit,
    /// Hour-of-day (UTC) climatology, 24 rows.
    pub hourly: Vec<HourlyInputs>,
    pub data: DataSummary,
}

impl ModelBundle {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let b: ModelBundle = serde_json::from_str(text)?;
        b.wind.model.validate()?;
        b.precip.model.validate()?;
        if b.hourly.is_empty() {
            return Err(Error::Format("model bundle has no hourly climatology".into()));
        }
        Ok(b)
    }
}

fn plant(config: &PipelineConfig) -> PlantSpecs {
    PlantSpecs {
        turbine: config.turbine,
        pv: config.pv,
        derating: config.derating,
        irradiance_max_kwm2: config.irradiance_max_kwm2,
    }
}

fn wet_pairs(dataset: &WeatherDataset, config: &PipelineConfig) -> Vec<(f64, f64)> {
    dataset
        .records
        .iter()
        .filter(|r| r.precip_mmh > config.wet_threshold_mmh)
        .map(|r| (r.wind_ms, r.precip_mmh))
        .collect()
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Population mean and standard deviation per UTC hour of day.
pub fn hourly_climatology(dataset: &WeatherDataset, irradiance_max: f64) -> Result<Vec<HourlyInputs>> {
    let mut wind: Vec<Vec<f64>> = vec![Vec::new(); 24];
    let mut ghi: Vec<Vec<f64>> = vec![Vec::new(); 24];
    for r in &dataset.records {
        let h = WeatherDataset::hour_of_day(r);
        wind[h].push(r.wind_ms);
        ghi[h].push(r.ghi_kwm2);
    }
    (0..24)
        .map(|hour| {
            if wind[hour].len() < 2 {
                return Err(Error::HourlyFit {
                    hour,
                    source: Box::new(Error::InsufficientData(format!("{} records", wind[hour].len()))),
                });
            }
            let (wind_mean_ms, wind_std_ms) = mean_std(&wind[hour]);
            let (ghi_mean_kwm2, ghi_std_kwm2) = mean_std(&ghi[hour]);
            if ghi_mean_kwm2 > 0.0 && ghi_std_kwm2 > 0.0 {
                BetaParams::fit_moments(ghi_mean_kwm2 / irradiance_max, ghi_std_kwm2 / irradiance_max)
                    .map_err(|e| Error::HourlyFit { hour, source: Box::new(e) })?;
            }
            Ok(HourlyInputs { wind_mean_ms, wind_std_ms, ghi_mean_kwm2, ghi_std_kwm2 })
        })
        .collect()
}

/// Wind GEV on every hour, precipitation splice and Frank θ on wet hours,
/// and the hourly climatology for normal weather.
pub fn fit_bundle(dataset: &WeatherDataset, config: &PipelineConfig) -> Result<ModelBundle> {
    config.validate()?;
    let records = &dataset.records;
    if records.is_empty() {
        return Err(Error::InsufficientData("empty dataset".into()));
    }
    let wind = fit_kind(ModelKind::Gev, &dataset.wind(), config.splice_quantile).map_err(|e| e.in_stage("wind GEV fit"))?;
    let pairs = wet_pairs(dataset, config);
    let wet: Vec<f64> = pairs.iter().map(|p| p.1).collect();
    let precip = fit_kind(ModelKind::GevGpSplice, &wet, config.splice_quantile)
        .map_err(|e| e.in_stage("precipitation GEV-GP fit"))?;
    let copula = fit_theta(&pairs).map_err(|e| e.in_stage("copula fit"))?;
    let hourly = hourly_climatology(dataset, config.irradiance_max_kwm2).map_err(|e| e.in_stage("hourly climatology"))?;
    Ok(ModelBundle {
        wind,
        precip,
        copula,
        hourly,
        data: DataSummary {
            source: dataset.source.clone(),
            n_records: records.len(),
            n_wet: wet.len(),
            first: records[0].timestamp,
            last: records[records.len() - 1].timestamp,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReports {
    pub wind: GofReport,
    pub precip: GofReport,
}

pub fn cmd_ingest(dataset: &WeatherDataset) -> Result<Artifacts> {
    let mut out = Artifacts::default();
    out.csv("dataset.csv", |w| dataset.write_csv(w))?;
    out.json("ingest_report.json", &dataset.report)?;
    Ok(out)
}

pub fn cmd_fit(dataset: &WeatherDataset, config: &PipelineConfig) -> Result<(ModelBundle, Artifacts)> {
    let bundle = fit_bundle(dataset, config)?;
    let wet: Vec<f64> = wet_pairs(dataset, config).iter().map(|p| p.1).collect();
    let reports = FitReports {
        wind: gof_report(&dataset.wind(), &bundle.wind.model, config.alpha)?,
        precip: gof_report(&wet, &bundle.precip.model, config.alpha)?,
    };
    let mut out = Artifacts::default();
    out.json("models.json", &bundle)?;
    out.json("gof_fit.json", &reports)?;
    Ok((bundle, out))
}

pub fn tree_of(bundle: &ModelBundle, config: &PipelineConfig) -> Result<ScenarioTree> {
    build_tree(&bundle.copula.copula(), &bundle.wind.model, &bundle.precip.model, &config.levels)
        .map_err(|e| e.in_stage("scenario tree"))
}

pub fn cmd_tree(bundle: &ModelBundle, config: &PipelineConfig) -> Result<(ScenarioTree, Artifacts)> {
    config.validate()?;
    let tree = tree_of(bundle, config)?;
    let mut out = Artifacts::default();
    out.csv("tree.csv", |w| tree.write_csv(w))?;
    out.text("tree.txt", tree.to_text());
    Ok((tree, out))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GenerateMode {
    Normal,
    Anomalous,
    PerCell,
}

impl FromStr for GenerateMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(GenerateMode::Normal),
            "anomalous" => Ok(GenerateMode::Anomalous),
            "per-cell" | "per_cell" => Ok(GenerateMode::PerCell),
            other => Err(Error::Config(format!("unknown mode `{other}` (normal | anomalous | per-cell)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEntry {
    pub scenario_id: usize,
    pub weight: f64,
    pub tag: WeatherTag,
    pub wind_kwh: f64,
    pub pv_kwh: f64,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergySummary {
    pub scenarios: Vec<EnergyEntry>,
    pub max_energy_scenario: usize,
    pub min_energy_scenario: usize,
    pub expected_energy_kwh: f64,
}

impl EnergySummary {
    pub fn of(set: &ScenarioSet) -> Self {
        let scenarios: Vec<EnergyEntry> = set
            .scenarios
            .iter()
            .map(|s| {
                let wind_kwh: f64 = s.wind_kw.iter().sum();
                let pv_kwh: f64 = s.pv_kw.iter().sum();
                EnergyEntry {
                    scenario_id: s.id,
                    weight: s.weight,
                    tag: s.tag,
                    wind_kwh,
                    pv_kwh,
                    energy_kwh: s.energy_kwh(),
                }
            })
            .collect();
        // first occurrence wins on ties
        let pick = |better: fn(f64, f64) -> bool| {
            scenarios
                .iter()
                .fold(None::<&EnergyEntry>, |best, e| match best {
                    Some(b) if !better(e.energy_kwh, b.energy_kwh) => Some(b),
                    _ => Some(e),
                })
                .map(|e| e.scenario_id)
                .unwrap_or(0)
        };
        EnergySummary {
            max_energy_scenario: pick(|a, b| a > b),
            min_energy_scenario: pick(|a, b| a < b),
            expected_energy_kwh: scenarios.iter().map(|e| e.weight * e.energy_kwh).sum(),
            scenarios,
        }
    }

    pub fn entry(&self, scenario_id: usize) -> Option<&EnergyEntry> {
        self.scenarios.iter().find(|e| e.scenario_id == scenario_id)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Generated {
    /// Unreduced sets: the normal-weather draw, or one set per cell.
    pub raw: Vec<ScenarioSet>,
    /// Reduced sets written out (one, or two for independent reduction).
    pub reduced: Vec<(String, ScenarioSet)>,
    pub energy: Option<EnergySummary>,
}

fn write_set(out: &mut Artifacts, stem: &str, set: &ScenarioSet) -> Result<()> {
    out.csv(&format!("{stem}.csv"), |w| crate::engine::write_scenario_csv(set, w))?;
    out.json(&format!("{stem}.json"), &crate::engine::ScenarioSidecar::of(set))
}

pub fn normal_set(bundle: &ModelBundle, config: &PipelineConfig, seed: u64) -> Result<ScenarioSet> {
    generate_normal(&bundle.hourly, &plant(config), config.n_scenarios, config.horizon, seed)
        .map_err(|e| e.in_stage("normal-weather generation"))
}

/// The 16 representative anomalous scenarios: each cell's draws reduced to
/// one profile, weighted by the cell's tree probability.
pub fn anomalous_sets(
    bundle: &ModelBundle,
    tree: &ScenarioTree,
    config: &PipelineConfig,
    seed: u64,
) -> Result<(Vec<ScenarioSet>, ScenarioSet)> {
    let copula = bundle.copula.copula();
    let weather = AnomalousWeather {
        copula: &copula,
        wind: &bundle.wind.model,
        precip: &bundle.precip.model,
        bounds: &config.levels,
    };
    let specs = plant(config);
    let mut raw = Vec::with_capacity(tree.cells.len());
    let mut reps = Vec::with_capacity(tree.cells.len());
    let mut flags = Vec::new();
    for cell in &tree.cells {
        let set = generate_anomalous(cell, &weather, &bundle.hourly, &specs, config.n_per_cell, config.horizon, seed)
            .map_err(|e| e.in_stage(format!("anomalous generation, cell {}", cell.scenario_id)))?;
        let rep = reduce(&set, 1, DistanceMode::Joint)?;
        let s = &rep.set.scenarios[0];
        reps.push(Scenario { id: cell.scenario_id, weight: cell.probability, ..s.clone() });
        flags.extend(set.metadata.flags.iter().cloned());
        raw.push(set);
    }
    let reduced = ScenarioSet {
        scenarios: reps,
        metadata: crate::engine::SetMetadata {
            seed,
            n_generated: config.n_per_cell * tree.cells.len(),
            horizon: config.horizon,
            hourly_inputs: bundle.hourly.clone(),
            flags,
        },
    };
    Ok((raw, reduced))
}

pub fn cmd_generate(bundle: &ModelBundle, config: &PipelineConfig, mode: GenerateMode) -> Result<(Generated, Artifacts)> {
    config.validate()?;
    let seed = config.require_seed()?;
    let mut out = Artifacts::default();
    let generated = match mode {
        GenerateMode::Normal => {
            let raw = normal_set(bundle, config, seed)?;
            let reduced: Vec<(String, ScenarioSet)> = match config.reduction {
                ReductionMode::Joint => {
                    vec![("normal_reduced".into(), reduce(&raw, config.reduced_normal, DistanceMode::Joint)?.set)]
                }
                ReductionMode::Independent => vec![
                    ("normal_reduced_wind".into(), reduce(&raw, config.reduced_normal, DistanceMode::Wind)?.set),
                    ("normal_reduced_pv".into(), reduce(&raw, config.reduced_normal, DistanceMode::Pv)?.set),
                ],
            };
            write_set(&mut out, "normal_raw", &raw)?;
            for (stem, set) in &reduced {
                write_set(&mut out, stem, set)?;
            }
            let energy = EnergySummary::of(&reduced[0].1);
            out.json("energy_normal.json", &energy)?;
            Generated { raw: vec![raw], reduced, energy: Some(energy) }
        }
        GenerateMode::Anomalous => {
            let tree = tree_of(bundle, config)?;
            let (raw, reduced) = anomalous_sets(bundle, &tree, config, seed)?;
            write_set(&mut out, "anomalous", &reduced)?;
            let energy = EnergySummary::of(&reduced);
            out.json("energy_anomalous.json", &energy)?;
            Generated { raw, reduced: vec![("anomalous".into(), reduced)], energy: Some(energy) }
        }
        GenerateMode::PerCell => {
            let tree = tree_of(bundle, config)?;
            let (raw, _) = anomalous_sets(bundle, &tree, config, seed)?;
            for (cell, set) in tree.cells.iter().zip(&raw) {
                write_set(&mut out, &format!("cell_{:02}", cell.scenario_id), set)?;
            }
            Generated { raw, reduced: Vec::new(), energy: None }
        }
    };
    Ok((generated, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtCase {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hour: Option<usize>,
    pub input: InputMoments,
    pub output: OutputMoments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtReport {
    pub w0: f64,
    pub cases: Vec<UtCase>,
}

/// Propagate explicit input moments, or, without them, each hour of the
/// bundle's climatology with independent wind and irradiance.
pub fn cmd_ut(
    bundle: Option<&ModelBundle>,
    config: &PipelineConfig,
    input: Option<InputMoments>,
) -> Result<(UtReport, Artifacts)> {
    config.validate()?;
    let run = |hour: Option<usize>, m: InputMoments| -> Result<UtCase> {
        let output = propagate_power(&m, &config.turbine, &config.pv, config.w0)?;
        Ok(UtCase { hour, input: m, output })
    };
    let cases = match (input, bundle) {
        (Some(m), _) => vec![run(None, m)?],
        (None, Some(b)) => b
            .hourly
            .iter()
            .enumerate()
            .map(|(h, x)| {
                run(Some(h), InputMoments::diagonal(vec![x.wind_mean_ms, x.ghi_mean_kwm2], &[x.wind_std_ms, x.ghi_std_kwm2]))
            })
            .collect::<Result<_>>()?,
        (None, None) => return Err(Error::MissingArtifact("ut needs input moments or a fitted model bundle".into())),
    };
    let report = UtReport { w0: config.w0, cases };
    let mut out = Artifacts::default();
    out.json("ut.json", &report)?;
    Ok((report, out))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqSummary {
    pub name: String,
    pub r_squared: f64,
    pub slope: f64,
    pub intercept: f64,
    /// Largest |subject − reference| among the top tenth of the grid.
    pub max_upper_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub wind: GofReport,
    pub precip: GofReport,
    pub precip_comparison: Comparison,
    pub qq: Vec<QqSummary>,
}

fn pooled(set: &ScenarioSet, pv: bool) -> Vec<f64> {
    set.scenarios.iter().flat_map(|s| if pv { s.pv_kw.iter() } else { s.wind_kw.iter() }).copied().collect()
}

/// Marginal K-S/AIC, GP vs GEV-GP ranking on wet-hour precipitation, and
/// QQ data of the normal-weather set against historical power and against
/// an independent regeneration.
pub fn cmd_validate(
    bundle: &ModelBundle,
    dataset: &WeatherDataset,
    normal_raw: &ScenarioSet,
    config: &PipelineConfig,
) -> Result<(ValidationReport, Artifacts)> {
    config.validate()?;
    let seed = config.require_seed()?;
    let mut out = Artifacts::default();
    let wind_obs = dataset.wind();
    let wet: Vec<f64> = wet_pairs(dataset, config).iter().map(|p| p.1).collect();
    let wind = gof_report(&wind_obs, &bundle.wind.model, config.alpha)?;
    let precip = gof_report(&wet, &bundle.precip.model, config.alpha)?;
    let precip_comparison =
        model_comparison(&wet, &[ModelKind::Gp, ModelKind::GevGpSplice], config.splice_quantile, config.alpha)?;

    out.csv("ecdf_wind.csv", |w| write_ecdf_csv(&wind_obs, &bundle.wind.model, w))?;
    out.csv("ecdf_precip.csv", |w| write_ecdf_csv(&wet, &bundle.precip.model, w))?;
    out.csv("pdf_wind.csv", |w| write_pdf_overlay_csv(&wind_obs, &bundle.wind.model, config.histogram_bins, w))?;
    out.csv("pdf_precip.csv", |w| write_pdf_overlay_csv(&wet, &bundle.precip.model, config.histogram_bins, w))?;

    let history_wind: Vec<f64> = dataset.records.iter().map(|r| config.turbine.power(r.wind_ms)).collect();
    let history_pv: Vec<f64> = dataset.records.iter().map(|r| config.pv.power(r.ghi_kwm2)).collect();
    let regenerated = normal_set(bundle, config, seed.wrapping_add(1))?;
    let pairs: [(&str, &[f64], Vec<f64>); 4] = [
        ("wind_history", &history_wind, pooled(normal_raw, false)),
        ("pv_history", &history_pv, pooled(normal_raw, true)),
        ("wind_regenerated", &pooled(&regenerated, false), pooled(normal_raw, false)),
        ("pv_regenerated", &pooled(&regenerated, true), pooled(normal_raw, true)),
    ];
    let mut qq = Vec::new();
    for (name, reference, subject) in pairs.iter() {
        let d = qq_data(QqReference::Samples(reference), subject, config.qq_points)?;
        let top = d.probabilities.iter().position(|&p| p > 0.9).unwrap_or(0);
        let max_upper_residual = d.residuals()[top..].iter().fold(0.0f64, |m, r| m.max(r.abs()));
        out.csv(&format!("qq_{name}.csv"), |w| d.write_csv(w))?;
        qq.push(QqSummary {
            name: name.to_string(),
            r_squared: d.r_squared,
            slope: d.slope,
            intercept: d.intercept,
            max_upper_residual,
        });
    }
    let report = ValidationReport { wind, precip, precip_comparison, qq };
    out.json("validation.json", &report)?;
    Ok((report, out))
}
