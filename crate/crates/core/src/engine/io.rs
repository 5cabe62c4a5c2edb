//! Long-form CSV plus JSON sidecar.
//!
//! Floats are written in Rust's shortest round-trip form, so a reload is
//! bit-exact.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::engine::{Scenario, ScenarioSet, SetMetadata, WeatherTag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidecarEntry {
    pub scenario_id: usize,
    pub weight: f64,
    pub tag: WeatherTag,
    pub energy_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSidecar {
    pub metadata: SetMetadata,
    pub scenarios: Vec<SidecarEntry>,
}

impl ScenarioSidecar {
    pub fn of(set: &ScenarioSet) -> Self {
        ScenarioSidecar {
            metadata: set.metadata.clone(),
            scenarios: set
                .scenarios
                .iter()
                .map(|s| SidecarEntry {
                    scenario_id: s.id,
                    weight: s.weight,
                    tag: s.tag,
                    energy_kwh: s.energy_kwh(),
                })
                .collect(),
        }
    }
}

/// Columns: scenario_id, hour, wind_kw, pv_kw.
pub fn write_scenario_csv<W: Write>(set: &ScenarioSet, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["scenario_id", "hour", "wind_kw", "pv_kw"])?;
    for s in &set.scenarios {
        for (t, (wind, pv)) in s.wind_kw.iter().zip(&s.pv_kw).enumerate() {
            w.write_record([s.id.to_string(), t.to_string(), wind.to_string(), pv.to_string()])?;
        }
    }
    w.flush().map_err(|e| Error::io("writing scenario csv", e))?;
    Ok(())
}

pub fn write_scenario_set<C: Write, J: Write>(set: &ScenarioSet, csv_out: C, mut json_out: J) -> Result<()> {
    write_scenario_csv(set, csv_out)?;
    serde_json::to_writer_pretty(&mut json_out, &ScenarioSidecar::of(set))?;
    json_out.write_all(b"\n").map_err(|e| Error::io("writing scenario sidecar", e))?;
    Ok(())
}

#[derive(Deserialize)]
struct Row {
    scenario_id: usize,
    hour: usize,
    wind_kw: f64,
    pv_kw: f64,
}

pub fn read_scenario_set<C: Read, J: Read>(csv_in: C, json_in: J) -> Result<ScenarioSet> {
    let sidecar: ScenarioSidecar = serde_json::from_reader(json_in)?;
    let mut series: BTreeMap<usize, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    let mut r = csv::Reader::from_reader(csv_in);
    for (line, row) in r.deserialize::<Row>().enumerate() {
        let row = row?;
        let entry = series.entry(row.scenario_id).or_default();
        if row.hour != entry.0.len() {
            return Err(Error::Format(format!(
                "scenario csv row {}: scenario {} hour {} out of order",
                line + 2,
                row.scenario_id,
                row.hour
            )));
        }
        entry.0.push(row.wind_kw);
        entry.1.push(row.pv_kw);
    }
    let mut scenarios = Vec::with_capacity(sidecar.scenarios.len());
    for e in &sidecar.scenarios {
        let (wind_kw, pv_kw) = series
            .remove(&e.scenario_id)
            .ok_or_else(|| Error::Format(format!("scenario {} missing from csv", e.scenario_id)))?;
        if wind_kw.len() != sidecar.metadata.horizon {
            return Err(Error::Dimension(format!(
                "scenario {} has {} hours, sidecar says {}",
                e.scenario_id,
                wind_kw.len(),
                sidecar.metadata.horizon
            )));
        }
        scenarios.push(Scenario { id: e.scenario_id, wind_kw, pv_kw, weight: e.weight, tag: e.tag });
    }
    if let Some(id) = series.keys().next() {
        return Err(Error::Format(format!("scenario {id} in csv has no sidecar entry")));
    }
    Ok(ScenarioSet { scenarios, metadata: sidecar.metadata })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{generate_normal, HourlyInputs, PlantSpecs};
    use crate::power::{DeratingTable, PvSpec, TurbineSpec};

    #[test]
    fn round_trip_is_bit_exact() {
        let hourly: Vec<HourlyInputs> = (0..24)
            .map(|h| HourlyInputs {
                wind_mean_ms: 5.0 + h as f64 / 7.0,
                wind_std_ms: 2.0,
                ghi_mean_kwm2: if (7..18).contains(&h) { 0.4 } else { 0.0 },
                ghi_std_kwm2: if (7..18).contains(&h) { 0.1 } else { 0.0 },
            })
            .collect();
        let specs = PlantSpecs {
            turbine: TurbineSpec::default(),
            pv: PvSpec::default(),
            derating: DeratingTable::default(),
            irradiance_max_kwm2: 1.0,
        };
        let set = generate_normal(&hourly, &specs, 17, 24, 11).unwrap();
        let (mut c, mut j) = (Vec::new(), Vec::new());
        write_scenario_set(&set, &mut c, &mut j).unwrap();
        let back = read_scenario_set(c.as_slice(), j.as_slice()).unwrap();
        assert_eq!(back, set);
        let text = String::from_utf8(c).unwrap();
        assert!(text.starts_with("scenario_id,hour,wind_kw,pv_kw\n"));
        assert_eq!(text.lines().count(), 1 + 17 * 24);
    }

    #[test]
    fn missing_rows_are_reported() {
        let set = ScenarioSet {
            scenarios: vec![Scenario { id: 3, wind_kw: vec![1.0, 2.0], pv_kw: vec![0.0, 0.5], weight: 1.0, tag: WeatherTag::Normal }],
            metadata: SetMetadata { seed: 1, n_generated: 1, horizon: 2, hourly_inputs: vec![], flags: vec![] },
        };
        let (mut c, mut j) = (Vec::new(), Vec::new());
        write_scenario_set(&set, &mut c, &mut j).unwrap();
        let truncated: String = String::from_utf8(c).unwrap().lines().take(2).map(|l| format!("{l}\n")).collect();
        assert!(matches!(read_scenario_set(truncated.as_bytes(), j.as_slice()), Err(Error::Dimension(_))));
    }
}
