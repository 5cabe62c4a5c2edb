//! The 4×4 precipitation-level × wind-level scenario tree.

use std::fmt::Write as _;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::copula::FrankCopula;
use crate::error::{Error, Result};
use crate::marginal::MarginalModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrecipLevel {
    Moderate,
    Heavy,
    Rainstorm,
    Torrential,
}

impl PrecipLevel {
    pub const ALL: [PrecipLevel; 4] = [
        PrecipLevel::Moderate,
        PrecipLevel::Heavy,
        PrecipLevel::Rainstorm,
        PrecipLevel::Torrential,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PrecipLevel::Moderate => "moderate",
            PrecipLevel::Heavy => "heavy",
            PrecipLevel::Rainstorm => "rainstorm",
            PrecipLevel::Torrential => "torrential",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PrecipLevel::Moderate => "Moderate rain",
            PrecipLevel::Heavy => "Heavy rain",
            PrecipLevel::Rainstorm => "Rainstorm",
            PrecipLevel::Torrential => "Torrential rain",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        PrecipLevel::ALL.into_iter().find(|l| l.name() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Beaufort-style wind force level 8–11.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum WindLevel {
    #[serde(rename = "8")]
    L8,
    #[serde(rename = "9")]
    L9,
    #[serde(rename = "10")]
    L10,
    #[serde(rename = "11")]
    L11,
}

impl WindLevel {
    pub const ALL: [WindLevel; 4] = [WindLevel::L8, WindLevel::L9, WindLevel::L10, WindLevel::L11];

    pub fn number(self) -> u8 {
        8 + self as u8
    }

    pub fn from_number(n: u8) -> Option<Self> {
        WindLevel::ALL.into_iter().find(|l| l.number() == n)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

const fn iv(lo: f64, hi: f64) -> Interval {
    Interval { lo, hi }
}

/// Interval bounds of the four precipitation (mm/h) and four wind (m/s)
/// levels, in increasing severity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelBounds {
    pub precip: [Interval; 4],
    pub wind: [Interval; 4],
}

impl Default for LevelBounds {
    fn default() -> Self {
        LevelBounds {
            precip: [
                iv(0.4126, 1.0416),
                iv(1.0417, 2.0832),
                iv(2.0833, 4.1666),
                iv(4.1666, 10.4166),
            ],
            wind: [iv(17.2, 20.7), iv(20.8, 24.4), iv(24.5, 28.4), iv(28.5, 32.6)],
        }
    }
}

/// Each level owns [lo_i, lo_{i+1}); the last owns [lo, hi].
fn edges(levels: &[Interval; 4]) -> [(f64, f64); 4] {
    std::array::from_fn(|i| {
        let upper = if i + 1 < 4 { levels[i + 1].lo } else { levels[i].hi };
        (levels[i].lo, upper)
    })
}

fn locate(levels: &[Interval; 4], x: f64) -> Option<usize> {
    let e = edges(levels);
    (0..4).find(|&i| {
        let (lo, hi) = e[i];
        if i == 3 {
            x >= lo && x <= hi
        } else {
            x >= lo && x < hi
        }
    })
}

impl LevelBounds {
    pub fn validate(&self) -> Result<()> {
        for (name, levels) in [("precipitation", &self.precip), ("wind", &self.wind)] {
            for (i, l) in levels.iter().enumerate() {
                if !(l.lo.is_finite() && l.hi.is_finite() && l.lo >= 0.0 && l.lo < l.hi) {
                    return Err(Error::Config(format!("{name} level {i}: bad interval {l:?}")));
                }
                if i > 0 && levels[i - 1].hi > l.lo {
                    return Err(Error::Config(format!("{name} levels {} and {i} overlap", i - 1)));
                }
            }
        }
        Ok(())
    }

    /// Raw-variable rectangle of a cell: (wind lo, wind hi, precip lo, precip hi).
    pub fn cell_box(&self, precip: PrecipLevel, wind: WindLevel) -> (f64, f64, f64, f64) {
        let w = edges(&self.wind)[wind.index()];
        let p = edges(&self.precip)[precip.index()];
        (w.0, w.1, p.0, p.1)
    }

    /// Levels of an observation; `None` outside every anomalous interval.
    pub fn classify(&self, wind: f64, precip: f64) -> (Option<WindLevel>, Option<PrecipLevel>) {
        (
            locate(&self.wind, wind).map(|i| WindLevel::ALL[i]),
            locate(&self.precip, precip).map(|i| PrecipLevel::ALL[i]),
        )
    }
}

pub fn classify(wind: f64, precip: f64, bounds: &LevelBounds) -> (Option<WindLevel>, Option<PrecipLevel>) {
    bounds.classify(wind, precip)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioCell {
    /// 1-based, precipitation-major.
    pub scenario_id: usize,
    pub precip_level: PrecipLevel,
    pub wind_level: WindLevel,
    /// Probability conditional on the weather being anomalous.
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioTree {
    pub cells: Vec<ScenarioCell>,
    /// Unconditional probability of landing anywhere in the 16-cell box.
    pub anomalous_mass: f64,
}

impl ScenarioTree {
    pub fn cell(&self, scenario_id: usize) -> Option<&ScenarioCell> {
        self.cells.iter().find(|c| c.scenario_id == scenario_id)
    }

    /// CSV with columns scenario_id, precip_level, wind_level,
    /// probability_percent (3 decimals) and probability (full precision,
    /// used when reloading).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["scenario_id", "precip_level", "wind_level", "probability_percent", "probability"])?;
        for c in &self.cells {
            w.write_record([
                c.scenario_id.to_string(),
                c.precip_level.name().to_string(),
                c.wind_level.number().to_string(),
                format!("{:.3}", c.probability * 100.0),
                c.probability.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("writing tree csv", e))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Format(e.to_string()))
    }

    /// Reload cells written by [`write_csv`](Self::write_csv). The
    /// unconditional mass is not part of the CSV and is returned as NaN.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Format(format!("tree csv: missing column `{name}`")))
        };
        let (ci, cp, cw, cprob) = (col("scenario_id")?, col("precip_level")?, col("wind_level")?, col("probability")?);
        let mut cells = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let bad = |what: &str| Error::Format(format!("tree csv: bad {what} in {rec:?}"));
            let scenario_id = rec[ci].parse().map_err(|_| bad("scenario_id"))?;
            let precip_level = PrecipLevel::from_name(&rec[cp]).ok_or_else(|| bad("precip_level"))?;
            let wind_level = rec[cw]
                .parse()
                .ok()
                .and_then(WindLevel::from_number)
                .ok_or_else(|| bad("wind_level"))?;
            let probability = rec[cprob].parse().map_err(|_| bad("probability"))?;
            cells.push(ScenarioCell { scenario_id, precip_level, wind_level, probability });
        }
        Ok(ScenarioTree { cells, anomalous_mass: f64::NAN })
    }

    /// Fixed-width text table with percentages to 3 decimals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<12}{:<18}{:<12}{:>16}", "Scenario", "Precipitation", "Wind level", "Probability (%)");
        for c in &self.cells {
            let _ = writeln!(
                s,
                "{:<12}{:<18}{:<12}{:>16.3}",
                format!("Scenario {}", c.scenario_id),
                c.precip_level.label(),
                format!("Level {}", c.wind_level.number()),
                c.probability * 100.0
            );
        }
        let total: f64 = self.cells.iter().map(|c| c.probability).sum();
        let _ = writeln!(s, "{:<42}{:>16.3}", "Total", total * 100.0);
        if self.anomalous_mass.is_finite() {
            let _ = writeln!(s, "Unconditional anomalous-event probability: {:.6e}", self.anomalous_mass);
        }
        s
    }
}

/// Cell probabilities from the copula measure of each cell's rectangle in
/// probability space, normalised over the 16 anomalous cells.
pub fn build_tree(
    copula: &FrankCopula,
    wind: &MarginalModel,
    precip: &MarginalModel,
    bounds: &LevelBounds,
) -> Result<ScenarioTree> {
    bounds.validate()?;
    let mut raw = Vec::with_capacity(16);
    for p in PrecipLevel::ALL {
        for w in WindLevel::ALL {
            let (w_lo, w_hi, p_lo, p_hi) = bounds.cell_box(p, w);
            let mass = copula
                .rectangle_probability(wind.cdf(w_lo), wind.cdf(w_hi), precip.cdf(p_lo), precip.cdf(p_hi))
                .max(0.0);
            raw.push((p, w, mass));
        }
    }
    let total: f64 = raw.iter().map(|r| r.2).sum();
    if !(total >= 1e-10) {
        return Err(Error::DegenerateRegion(total));
    }
    let cells = raw
        .into_iter()
        .enumerate()
        .map(|(i, (precip_level, wind_level, mass))| ScenarioCell {
            scenario_id: i + 1,
            precip_level,
            wind_level,
            probability: mass / total,
        })
        .collect();
    Ok(ScenarioTree { cells, anomalous_mass: total })
}
