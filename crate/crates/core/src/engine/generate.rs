use serde::{Deserialize, Serialize};

use crate::copula::FrankCopula;
use crate::engine::{Scenario, ScenarioSet, SetMetadata, WeatherTag};
use crate::error::{Error, Result};
use crate::marginal::{BetaParams, MarginalModel, WeibullParams};
use crate::numeric::bisect_increasing;
use crate::power::{DeratingTable, PvSpec, TurbineSpec};
use crate::rng::{open_unit, substream, Purpose, Stream};
use crate::tree::{LevelBounds, ScenarioCell};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Below this unconditional cell probability rejection sampling is replaced
/// by exact conditional inversion inside the rectangle.
pub const MIN_REJECTION_ACCEPTANCE: f64 = 1e-4;

/// Climatological inputs for one hour of the day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourlyInputs {
    pub wind_mean_ms: f64,
    pub wind_std_ms: f64,
    pub ghi_mean_kwm2: f64,
    pub ghi_std_kwm2: f64,
}

/// Plant description shared by all generators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlantSpecs {
    pub turbine: TurbineSpec,
    pub pv: PvSpec,
    pub derating: DeratingTable,
    /// Irradiance that maps to 1 on the Beta [0, 1] scale, kW/m².
    pub irradiance_max_kwm2: f64,
}

impl PlantSpecs {
    pub fn validate(&self) -> Result<()> {
        self.turbine.validate()?;
        self.pv.validate()?;
        self.derating.validate()?;
        if !(self.irradiance_max_kwm2 > 0.0 && self.irradiance_max_kwm2.is_finite()) {
            return Err(Error::Config("irradiance_max_kwm2 must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
enum IrradianceLaw {
    Dark,
    Fixed(f64),
    Beta(BetaParams),
}

#[derive(Debug, Clone)]
struct HourlyLaws {
    wind: Vec<Option<WeibullParams>>,
    irradiance: Vec<IrradianceLaw>,
}

impl HourlyLaws {
    fn new(hourly: &[HourlyInputs], irradiance_max: f64) -> Result<Self> {
        if hourly.is_empty() {
            return Err(Error::InsufficientData("no hourly inputs".into()));
        }
        let mut wind = Vec::with_capacity(hourly.len());
        let mut irradiance = Vec::with_capacity(hourly.len());
        for (hour, h) in hourly.iter().enumerate() {
            let wrap = |e: Error| Error::HourlyFit { hour, source: Box::new(e) };
            wind.push(Self::wind_law(h).map_err(wrap)?);
            irradiance.push(Self::irradiance_law(h, irradiance_max).map_err(wrap)?);
        }
        Ok(HourlyLaws { wind, irradiance })
    }

    /// Calm hours (mean 0) produce no wind at all.
    fn wind_law(h: &HourlyInputs) -> Result<Option<WeibullParams>> {
        if !(h.wind_mean_ms >= 0.0) {
            return Err(Error::Domain(format!("wind mean must be ≥ 0, got {}", h.wind_mean_ms)));
        }
        if h.wind_mean_ms == 0.0 {
            return Ok(None);
        }
        Ok(Some(WeibullParams::from_mean_rayleigh(h.wind_mean_ms)?))
    }

    fn irradiance_law(h: &HourlyInputs, irradiance_max: f64) -> Result<IrradianceLaw> {
        let mean = h.ghi_mean_kwm2 / irradiance_max;
        let std = h.ghi_std_kwm2 / irradiance_max;
        if !(mean >= 0.0) || !(std >= 0.0) {
            return Err(Error::Domain(format!("irradiance moments must be ≥ 0: {h:?}")));
        }
        Ok(if mean == 0.0 {
            IrradianceLaw::Dark
        } else if std == 0.0 {
            IrradianceLaw::Fixed(mean.min(1.0))
        } else {
            IrradianceLaw::Beta(BetaParams::fit_moments(mean, std)?)
        })
    }

    fn len(&self) -> usize {
        self.wind.len()
    }

    fn draw_wind(&self, hour: usize, rng: &mut Stream) -> f64 {
        let u = open_unit(rng);
        match self.wind[hour % self.len()] {
            Some(w) => w.quantile(u),
            None => 0.0,
        }
    }

    /// Clear-sky irradiance in kW/m².
    fn draw_irradiance(&self, hour: usize, irradiance_max: f64, rng: &mut Stream) -> f64 {
        let u = open_unit(rng);
        let s = match self.irradiance[hour % self.len()] {
            IrradianceLaw::Dark => 0.0,
            IrradianceLaw::Fixed(s) => s,
            IrradianceLaw::Beta(b) => b.quantile(u),
        };
        s * irradiance_max
    }
}

fn map_indices<T: Send, F: Fn(usize) -> T + Sync + Send>(n: usize, f: F) -> Vec<T> {
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Normal-weather scenarios: each hour's wind speed from the k = 2 Weibull
/// fixed by that hour's mean, irradiance from the moment-matched Beta, both
/// pushed through the power curves. Weights start equal at 1/n.
///
/// Hour `t` of the horizon uses `hourly[t % hourly.len()]`. Scenario `i`
/// draws from its own sub-stream of `seed`.
pub fn generate_normal(
    hourly: &[HourlyInputs],
    specs: &PlantSpecs,
    n: usize,
    horizon: usize,
    seed: u64,
) -> Result<ScenarioSet> {
    if n == 0 || horizon == 0 {
        return Err(Error::Domain("scenario count and horizon must be ≥ 1".into()));
    }
    specs.validate()?;
    let laws = HourlyLaws::new(hourly, specs.irradiance_max_kwm2)?;
    let weight = 1.0 / n as f64;
    let scenarios = map_indices(n, |i| {
        let mut rng = substream(seed, Purpose::Normal, i as u64);
        let mut wind_kw = Vec::with_capacity(horizon);
        let mut pv_kw = Vec::with_capacity(horizon);
        for t in 0..horizon {
            let v = laws.draw_wind(t, &mut rng);
            let s = laws.draw_irradiance(t, specs.irradiance_max_kwm2, &mut rng);
            wind_kw.push(specs.turbine.power(v));
            pv_kw.push(specs.pv.power(s));
        }
        Scenario { id: i, wind_kw, pv_kw, weight, tag: WeatherTag::Normal }
    });
    Ok(ScenarioSet {
        scenarios,
        metadata: SetMetadata {
            seed,
            n_generated: n,
            horizon,
            hourly_inputs: hourly.to_vec(),
            flags: Vec::new(),
        },
    })
}

/// Fitted anomalous-weather model.
#[derive(Debug, Clone, Copy)]
pub struct AnomalousWeather<'a> {
    pub copula: &'a FrankCopula,
    pub wind: &'a MarginalModel,
    pub precip: &'a MarginalModel,
    pub bounds: &'a LevelBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellSampling {
    Rejection,
    /// Exact inversion restricted to the rectangle (low-probability cells).
    ConditionalInversion,
    /// The cell carries no copula mass; uniform draws over its box.
    DegenerateUniform,
}

fn clamp_into(x: f64, lo: f64, hi: f64, hi_inclusive: bool) -> f64 {
    let top = if hi_inclusive { hi } else { next_down(hi) };
    x.clamp(lo, top.max(lo))
}

fn next_down(x: f64) -> f64 {
    if x > 0.0 {
        f64::from_bits(x.to_bits() - 1)
    } else {
        x
    }
}

/// Draw `hours` (wind m/s, precipitation mm/h) pairs from the copula model
/// conditioned on landing in `cell`.
pub fn sample_cell_weather(
    weather: &AnomalousWeather<'_>,
    cell: &ScenarioCell,
    hours: usize,
    rng: &mut Stream,
) -> (Vec<(f64, f64)>, CellSampling) {
    let (w_lo, w_hi, p_lo, p_hi) = weather.bounds.cell_box(cell.precip_level, cell.wind_level);
    let w_last = cell.wind_level.index() == 3;
    let p_last = cell.precip_level.index() == 3;
    let (u1, u2) = (weather.wind.cdf(w_lo), weather.wind.cdf(w_hi));
    let (v1, v2) = (weather.precip.cdf(p_lo), weather.precip.cdf(p_hi));
    let c = weather.copula;
    let mass = c.rectangle_probability(u1, u2, v1, v2);

    let finish = |u: f64, v: f64| {
        let w = weather.wind.quantile_unchecked(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON));
        let p = weather.precip.quantile_unchecked(v.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON));
        (clamp_into(w, w_lo, w_hi, w_last), clamp_into(p, p_lo, p_hi, p_last))
    };

    if !(mass > 0.0) || u2 <= u1 || v2 <= v1 {
        let pairs = (0..hours)
            .map(|_| {
                let w = w_lo + (w_hi - w_lo) * open_unit(rng);
                let p = p_lo + (p_hi - p_lo) * open_unit(rng);
                (clamp_into(w, w_lo, w_hi, w_last), clamp_into(p, p_lo, p_hi, p_last))
            })
            .collect();
        return (pairs, CellSampling::DegenerateUniform);
    }

    if mass >= MIN_REJECTION_ACCEPTANCE {
        let mut pairs = Vec::with_capacity(hours);
        while pairs.len() < hours {
            let (u, v) = c.sample_uv(rng);
            if u >= u1 && u <= u2 && v >= v1 && v <= v2 {
                pairs.push(finish(u, v));
            }
        }
        return (pairs, CellSampling::Rejection);
    }

    // U-marginal of the rectangle-restricted law, then V | U inside [v1, v2]
    let base = c.cdf(u1, v2) - c.cdf(u1, v1);
    let pairs = (0..hours)
        .map(|_| {
            let target = open_unit(rng) * mass;
            let u = bisect_increasing(|x| c.cdf(x, v2) - c.cdf(x, v1) - base, target, u1, u2);
            let (h1, h2) = (c.conditional_cdf(v1, u), c.conditional_cdf(v2, u));
            let w = h1 + (h2 - h1) * open_unit(rng);
            let v = c.conditional_quantile(w, u).clamp(v1, v2);
            finish(u, v)
        })
        .collect();
    (pairs, CellSampling::ConditionalInversion)
}

/// Scenarios for one anomalous-weather cell. Hourly (wind, precipitation)
/// pairs come from the copula conditioned on the cell; wind power follows
/// the turbine curve (including cut-out shutdown) and PV is a clear-sky
/// draw scaled by the cell's precipitation derating.
pub fn generate_anomalous(
    cell: &ScenarioCell,
    weather: &AnomalousWeather<'_>,
    hourly: &[HourlyInputs],
    specs: &PlantSpecs,
    n: usize,
    horizon: usize,
    seed: u64,
) -> Result<ScenarioSet> {
    if n == 0 || horizon == 0 {
        return Err(Error::Domain("scenario count and horizon must be ≥ 1".into()));
    }
    specs.validate()?;
    weather.bounds.validate()?;
    let laws = HourlyLaws::new(hourly, specs.irradiance_max_kwm2)?;
    let multiplier = specs.derating.multiplier(Some(cell.precip_level));
    let weight = 1.0 / n as f64;
    let tag = WeatherTag::Cell {
        scenario_id: cell.scenario_id,
        precip_level: cell.precip_level,
        wind_level: cell.wind_level,
    };
    let results = map_indices(n, |i| {
        let index = ((cell.scenario_id as u64) << 32) | i as u64;
        let mut rng = substream(seed, Purpose::Anomalous, index);
        let (pairs, method) = sample_cell_weather(weather, cell, horizon, &mut rng);
        let mut wind_kw = Vec::with_capacity(horizon);
        let mut pv_kw = Vec::with_capacity(horizon);
        for (t, &(v, _)) in pairs.iter().enumerate() {
            wind_kw.push(specs.turbine.power(v));
            let s = laws.draw_irradiance(t, specs.irradiance_max_kwm2, &mut rng);
            pv_kw.push(specs.pv.power(s) * multiplier);
        }
        (Scenario { id: i, wind_kw, pv_kw, weight, tag }, method)
    });
    let method = results.first().map(|r| r.1).unwrap_or(CellSampling::Rejection);
    let mut flags = Vec::new();
    if method != CellSampling::Rejection {
        flags.push(format!(
            "cell {}: {}",
            cell.scenario_id,
            serde_json::to_value(method).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
        ));
    }
    Ok(ScenarioSet {
        scenarios: results.into_iter().map(|r| r.0).collect(),
        metadata: SetMetadata {
            seed,
            n_generated: n,
            horizon,
            hourly_inputs: hourly.to_vec(),
            flags,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::marginal::{GevGpSplice, GevParams, GpParams};
    use crate::tree::{build_tree, PrecipLevel, WindLevel};

    pub(crate) fn diurnal() -> Vec<HourlyInputs> {
        (0..24)
            .map(|h| {
                let sun = ((h as f64 - 6.0) / 12.0 * std::f64::consts::PI).sin().max(0.0);
                HourlyInputs {
                    wind_mean_ms: 6.0 + 2.0 * (h as f64 / 24.0 * std::f64::consts::TAU).cos(),
                    wind_std_ms: 2.5,
                    ghi_mean_kwm2: 0.75 * sun,
                    ghi_std_kwm2: 0.12 * sun,
                }
            })
            .collect()
    }

    fn specs() -> PlantSpecs {
        PlantSpecs {
            turbine: TurbineSpec::default(),
            pv: PvSpec::default(),
            derating: DeratingTable::default(),
            irradiance_max_kwm2: 1.0,
        }
    }

    fn models() -> (FrankCopula, MarginalModel, MarginalModel) {
        let body = GevParams::new(0.6, 0.9, 0.1).unwrap();
        let u = body.quantile(0.9);
        (
            FrankCopula::new(4.0).unwrap(),
            MarginalModel::Gev(GevParams::new(11.892, 8.0, -0.175).unwrap()),
            MarginalModel::GevGpSplice(GevGpSplice::new(body, GpParams::new(u, 1.5, 0.1).unwrap(), u, 0.08).unwrap()),
        )
    }

    #[test]
    fn normal_set_shape_and_night() {
        let set = generate_normal(&diurnal(), &specs(), 200, 24, 1).unwrap();
        assert_eq!(set.len(), 200);
        assert!((set.total_weight() - 1.0).abs() < 1e-12);
        for s in &set.scenarios {
            assert_eq!(s.horizon(), 24);
            for h in [0, 1, 2, 3, 4, 5, 6, 19, 23] {
                assert_eq!(s.pv_kw[h], 0.0);
            }
            assert!(s.wind_kw.iter().all(|&p| (0.0..=2000.0).contains(&p)));
            assert!(s.pv_kw.iter().all(|&p| (0.0..=2000.0).contains(&p)));
        }
    }

    #[test]
    fn normal_generation_is_deterministic() {
        let a = generate_normal(&diurnal(), &specs(), 50, 30, 9).unwrap();
        let b = generate_normal(&diurnal(), &specs(), 50, 30, 9).unwrap();
        assert_eq!(a, b);
        let c = generate_normal(&diurnal(), &specs(), 50, 30, 10).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn infeasible_irradiance_names_the_hour() {
        let mut hourly = diurnal();
        hourly[12].ghi_std_kwm2 = 0.6;
        match generate_normal(&hourly, &specs(), 10, 24, 1) {
            Err(Error::HourlyFit { hour, source }) => {
                assert_eq!(hour, 12);
                assert!(matches!(*source, Error::InfeasibleMoments { .. }));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn ensemble_wind_mean_tracks_inputs() {
        let hourly = diurnal();
        let laws = HourlyLaws::new(&hourly, 1.0).unwrap();
        let n = 100_000;
        for hour in [0, 7, 13] {
            let mut rng = substream(3, Purpose::Normal, hour as u64);
            let mean = (0..n).map(|_| laws.draw_wind(hour, &mut rng)).sum::<f64>() / n as f64;
            let target = hourly[hour].wind_mean_ms;
            assert!(((mean - target) / target).abs() < 0.02, "hour {hour}: {mean} vs {target}");
        }
    }

    #[test]
    fn cell_samples_stay_inside_their_cell() {
        let (c, w, p) = models();
        let bounds = LevelBounds::default();
        let weather = AnomalousWeather { copula: &c, wind: &w, precip: &p, bounds: &bounds };
        let tree = build_tree(&c, &w, &p, &bounds).unwrap();
        let mut rng = substream(4, Purpose::Anomalous, 0);
        for cell in &tree.cells {
            let (pairs, _) = sample_cell_weather(&weather, cell, 200, &mut rng);
            for (wind, precip) in pairs {
                assert_eq!(bounds.classify(wind, precip), (Some(cell.wind_level), Some(cell.precip_level)));
            }
        }
    }

    #[test]
    fn conditional_inversion_matches_rejection_in_distribution() {
        let (c, w, p) = models();
        let bounds = LevelBounds::default();
        let weather = AnomalousWeather { copula: &c, wind: &w, precip: &p, bounds: &bounds };
        let tree = build_tree(&c, &w, &p, &bounds).unwrap();
        let cell = tree.cells[5];
        let mut rng = substream(5, Purpose::Anomalous, 0);
        let (rej, m) = sample_cell_weather(&weather, &cell, 20_000, &mut rng);
        assert_eq!(m, CellSampling::Rejection);
        // force the exact sampler by raising the acceptance floor through a tiny copy of the routine
        let (w_lo, w_hi, p_lo, p_hi) = bounds.cell_box(cell.precip_level, cell.wind_level);
        let (u1, u2, v1, v2) = (w.cdf(w_lo), w.cdf(w_hi), p.cdf(p_lo), p.cdf(p_hi));
        let mass = c.rectangle_probability(u1, u2, v1, v2);
        let base = c.cdf(u1, v2) - c.cdf(u1, v1);
        let exact: Vec<(f64, f64)> = (0..20_000)
            .map(|_| {
                let target = open_unit(&mut rng) * mass;
                let u = bisect_increasing(|x| c.cdf(x, v2) - c.cdf(x, v1) - base, target, u1, u2);
                let (h1, h2) = (c.conditional_cdf(v1, u), c.conditional_cdf(v2, u));
                let v = c.conditional_quantile(h1 + (h2 - h1) * open_unit(&mut rng), u);
                (w.quantile_unchecked(u), p.quantile_unchecked(v))
            })
            .collect();
        let mean = |xs: &[(f64, f64)], f: fn(&(f64, f64)) -> f64| xs.iter().map(f).sum::<f64>() / xs.len() as f64;
        assert!((mean(&rej, |x| x.0) - mean(&exact, |x| x.0)).abs() < 0.05);
        assert!((mean(&rej, |x| x.1) - mean(&exact, |x| x.1)).abs() < 0.02);
    }

    #[test]
    fn high_wind_cells_shut_down_and_torrential_cells_derate() {
        let (c, w, p) = models();
        let bounds = LevelBounds::default();
        let weather = AnomalousWeather { copula: &c, wind: &w, precip: &p, bounds: &bounds };
        let tree = build_tree(&c, &w, &p, &bounds).unwrap();
        let s = specs();
        let cell = *tree.cells.iter().find(|c| c.wind_level == WindLevel::L11 && c.precip_level == PrecipLevel::Torrential).unwrap();
        let set = generate_anomalous(&cell, &weather, &diurnal(), &s, 20, 24, 3).unwrap();
        for sc in &set.scenarios {
            assert!(sc.wind_kw.iter().all(|&p| p == 0.0));
            assert!(sc.pv_kw.iter().all(|&p| p <= 0.10 * s.pv.capacity_kw + 1e-9));
        }
        // same streams without derating: PV scales by exactly the multiplier
        let undamped = PlantSpecs {
            derating: DeratingTable { moderate: 1.0, heavy: 1.0, rainstorm: 1.0, torrential: 1.0 },
            ..s
        };
        let raw = generate_anomalous(&cell, &weather, &diurnal(), &undamped, 20, 24, 3).unwrap();
        for (a, b) in set.scenarios.iter().zip(&raw.scenarios) {
            for (x, y) in a.pv_kw.iter().zip(&b.pv_kw) {
                assert!((x - 0.10 * y).abs() < 1e-9);
            }
        }
    }
}
