//! Monte-Carlo power scenarios and probability-distance reduction.

mod generate;
mod io;
mod reduce;

pub use generate::{
    generate_anomalous, generate_normal, sample_cell_weather, AnomalousWeather, CellSampling, HourlyInputs,
    PlantSpecs,
};
pub use io::{read_scenario_set, write_scenario_csv, write_scenario_set, ScenarioSidecar};
pub use reduce::{distance, distance_matrix, mean_distance, reduce, DistanceMode, MergeStep, Reduction};

use serde::{Deserialize, Serialize};

use crate::tree::{PrecipLevel, WindLevel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum WeatherTag {
    Normal,
    Cell {
        scenario_id: usize,
        precip_level: PrecipLevel,
        wind_level: WindLevel,
    },
}

/// One T-hour wind/PV power trajectory with its probability weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: usize,
    pub wind_kw: Vec<f64>,
    pub pv_kw: Vec<f64>,
    pub weight: f64,
    pub tag: WeatherTag,
}

impl Scenario {
    pub fn horizon(&self) -> usize {
        self.wind_kw.len()
    }

    /// Total wind + PV energy over the horizon in kWh (hourly steps).
    pub fn energy_kwh(&self) -> f64 {
        self.wind_kw.iter().sum::<f64>() + self.pv_kw.iter().sum::<f64>()
    }
}

pub fn scenario_energy(s: &Scenario) -> f64 {
    s.energy_kwh()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetMetadata {
    pub seed: u64,
    /// Scenarios drawn before any reduction.
    pub n_generated: usize,
    pub horizon: usize,
    #[serde(default)]
    pub hourly_inputs: Vec<HourlyInputs>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub flags: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSet {
    pub scenarios: Vec<Scenario>,
    pub metadata: SetMetadata,
}

impl ScenarioSet {
    pub fn total_weight(&self) -> f64 {
        self.scenarios.iter().map(|s| s.weight).sum()
    }

    pub fn len(&self) -> usize {
        self.scenarios.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scenarios.is_empty()
    }
}
