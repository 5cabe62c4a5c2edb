use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gof::DEFAULT_ALPHA;
use crate::power::{DeratingTable, PvSpec, TurbineSpec};
use crate::tree::LevelBounds;
use crate::ut::DEFAULT_W0;

/// How normal-weather sets are reduced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReductionMode {
    /// One reduction over the concatenated wind‖PV profile.
    #[default]
    Joint,
    /// Separate wind-only and PV-only reductions.
    Independent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub turbine: TurbineSpec,
    pub pv: PvSpec,
    pub derating: DeratingTable,
    pub levels: LevelBounds,
    pub w0: f64,
    /// Required by every command that samples.
    pub seed: Option<u64>,
    pub n_scenarios: usize,
    pub reduced_normal: usize,
    pub reduction: ReductionMode,
    /// Scenarios drawn per tree cell before reducing each cell to one.
    pub n_per_cell: usize,
    pub splice_quantile: f64,
    pub horizon: usize,
    pub irradiance_max_kwm2: f64,
    /// Hours with precipitation above this (mm/h) count as wet.
    pub wet_threshold_mmh: f64,
    pub alpha: f64,
    pub qq_points: usize,
    pub histogram_bins: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            turbine: TurbineSpec::default(),
            pv: PvSpec::default(),
            derating: DeratingTable::default(),
            levels: LevelBounds::default(),
            w0: DEFAULT_W0,
            seed: None,
            n_scenarios: 2000,
            reduced_normal: 5,
            reduction: ReductionMode::Joint,
            n_per_cell: 100,
            splice_quantile: 0.95,
            horizon: 24,
            irradiance_max_kwm2: 1.0,
            wet_threshold_mmh: 0.0,
            alpha: DEFAULT_ALPHA,
            qq_points: 100,
            histogram_bins: 40,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.turbine.validate()?;
        self.pv.validate()?;
        self.derating.validate()?;
        self.levels.validate()?;
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(0.0..1.0).contains(&self.w0) {
            return bad("w0 must be in [0, 1)");
        }
        if self.n_scenarios == 0 || self.horizon == 0 || self.n_per_cell == 0 {
            return bad("n_scenarios, n_per_cell and horizon must be ≥ 1");
        }
        if self.reduced_normal == 0 || self.reduced_normal > self.n_scenarios {
            return bad("reduced_normal must be in [1, n_scenarios]");
        }
        if !(0.8..=0.99).contains(&self.splice_quantile) {
            return bad("splice_quantile must be in [0.8, 0.99]");
        }
        if !(self.irradiance_max_kwm2 > 0.0 && self.irradiance_max_kwm2.is_finite()) {
            return bad("irradiance_max_kwm2 must be > 0");
        }
        if !(self.wet_threshold_mmh >= 0.0 && self.wet_threshold_mmh.is_finite()) {
            return bad("wet_threshold_mmh must be ≥ 0");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad("alpha must be in (0, 1)");
        }
        if self.qq_points < 10 || self.histogram_bins == 0 {
            return bad("qq_points must be ≥ 10 and histogram_bins ≥ 1");
        }
        Ok(())
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed
            .ok_or_else(|| Error::Config("a seed is required (set `seed` in the config or pass --seed)".into()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let c: PipelineConfig =
            serde_json::from_str(text).map_err(|e| Error::Config(format!("config: {e}")))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::from_json(&text)
    }
}
