//! Meteorological input → electrical output.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tree::PrecipLevel;

/// Piecewise-linear turbine power curve.
///
/// The speed thresholds default to a generic 3/12/25 m/s curve; they are
/// configuration, not properties of any particular turbine model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurbineSpec {
    pub cut_in_ms: f64,
    pub rated_speed_ms: f64,
    pub cut_out_ms: f64,
    pub rated_power_kw: f64,
}

impl Default for TurbineSpec {
    fn default() -> Self {
        TurbineSpec {
            cut_in_ms: 3.0,
            rated_speed_ms: 12.0,
            cut_out_ms: 25.0,
            rated_power_kw: 2000.0,
        }
    }
}

impl TurbineSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = 0.0 < self.cut_in_ms
            && self.cut_in_ms < self.rated_speed_ms
            && self.rated_speed_ms < self.cut_out_ms
            && self.cut_out_ms.is_finite()
            && self.rated_power_kw > 0.0
            && self.rated_power_kw.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "turbine needs 0 < cut-in < rated < cut-out and rated power > 0: {self:?}"
            )))
        }
    }

    /// Output in kW at hub wind speed `v` (m/s). Zero below cut-in, linear
    /// ramp to rated speed, flat to cut-out, zero from cut-out on.
    pub fn power(&self, v: f64) -> f64 {
        if v <= self.cut_in_ms || v >= self.cut_out_ms || v.is_nan() {
            0.0
        } else if v >= self.rated_speed_ms {
            self.rated_power_kw
        } else {
            self.rated_power_kw * (v - self.cut_in_ms) / (self.rated_speed_ms - self.cut_in_ms)
        }
    }
}

/// Fixed-panel PV array.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PvSpec {
    pub area_m2: f64,
    pub efficiency: f64,
    pub capacity_kw: f64,
}

impl Default for PvSpec {
    fn default() -> Self {
        PvSpec {
            area_m2: 12_000.0,
            efficiency: 0.18,
            capacity_kw: 2000.0,
        }
    }
}

impl PvSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = self.area_m2 > 0.0
            && self.area_m2.is_finite()
            && self.efficiency > 0.0
            && self.efficiency <= 1.0
            && self.capacity_kw > 0.0
            && self.capacity_kw.is_finite();
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "pv needs area > 0, 0 < efficiency ≤ 1, capacity > 0: {self:?}"
            )))
        }
    }

    /// η·s·A, clamped to the rated capacity. `s` in kW/m².
    pub fn power(&self, s: f64) -> f64 {
        if !(s > 0.0) {
            return 0.0;
        }
        (self.efficiency * s * self.area_m2).min(self.capacity_kw)
    }
}

/// PV output multiplier per precipitation level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeratingTable {
    pub moderate: f64,
    pub heavy: f64,
    pub rainstorm: f64,
    pub torrential: f64,
}

impl Default for DeratingTable {
    fn default() -> Self {
        DeratingTable {
            moderate: 0.50,
            heavy: 0.20,
            rainstorm: 0.15,
            torrential: 0.10,
        }
    }
}

impl DeratingTable {
    pub fn validate(&self) -> Result<()> {
        let m = [self.moderate, self.heavy, self.rainstorm, self.torrential];
        if m.iter().any(|&x| !(x > 0.0 && x <= 1.0)) {
            return Err(Error::Config(format!("derating multipliers must be in (0, 1]: {self:?}")));
        }
        if m.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Config(format!(
                "derating multipliers must not increase with precipitation severity: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn multiplier(&self, level: Option<PrecipLevel>) -> f64 {
        match level {
            None => 1.0,
            Some(PrecipLevel::Moderate) => self.moderate,
            Some(PrecipLevel::Heavy) => self.heavy,
            Some(PrecipLevel::Rainstorm) => self.rainstorm,
            Some(PrecipLevel::Torrential) => self.torrential,
        }
    }

    /// Multiplier looked up by level name, as used in configuration files.
    pub fn multiplier_by_name(&self, name: &str) -> Result<f64> {
        if name.is_empty() || name == "none" {
            return Ok(1.0);
        }
        let level = PrecipLevel::from_name(name)
            .ok_or_else(|| Error::Config(format!("unknown precipitation level `{name}`")))?;
        Ok(self.multiplier(Some(level)))
    }
}

pub fn wind_power(v: f64, spec: &TurbineSpec) -> f64 {
    spec.power(v)
}

pub fn pv_power(s: f64, spec: &PvSpec) -> f64 {
    spec.power(s)
}

pub fn pv_power_derated(s: f64, spec: &PvSpec, level: Option<PrecipLevel>, table: &DeratingTable) -> f64 {
    spec.power(s) * table.multiplier(level)
}
