//! Command orchestration behind the `wxscen` binary.
//!
//! Each `cmd_*` function does all of its work in memory and returns the
//! files it would write as [`Artifacts`]; nothing touches the output
//! directory until [`Artifacts::commit`].

mod commands;
mod config;
mod ingest;
pub mod synthetic;

pub use commands::{
    anomalous_sets, cmd_fit, cmd_generate, cmd_ingest, cmd_tree, cmd_ut, cmd_validate, fit_bundle, hourly_climatology,
    normal_set, tree_of, DataSummary, EnergyEntry, EnergySummary, FitReports, GenerateMode, Generated, ModelBundle,
    QqSummary, UtCase, UtReport, ValidationReport,
};
pub use config::{PipelineConfig, ReductionMode};
pub use ingest::{parse_timestamp, DateFilter, Gap, IngestReport, WeatherDataset, WeatherRecord, COLUMNS};

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::engine::{read_scenario_set, ScenarioSet};
use crate::error::{Error, Result};

pub const MODELS_FILE: &str = "models.json";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Artifacts(pub Vec<Artifact>);

impl Artifacts {
    pub fn push(&mut self, name: &str, bytes: Vec<u8>) {
        self.0.push(Artifact { name: name.to_string(), bytes });
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        self.push(name, bytes);
        Ok(())
    }

    pub fn csv<F: FnOnce(&mut Vec<u8>) -> Result<()>>(&mut self, name: &str, write: F) -> Result<()> {
        let mut bytes = Vec::new();
        write(&mut bytes)?;
        self.push(name, bytes);
        Ok(())
    }

    pub fn text(&mut self, name: &str, text: String) {
        self.push(name, text.into_bytes());
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.0.iter().find(|a| a.name == name).map(|a| a.bytes.as_slice())
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.iter().map(|a| a.name.as_str()).collect()
    }

    /// Write every artifact to a temporary sibling first, then rename them
    /// all into place.
    pub fn commit(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let mut staged = Vec::with_capacity(self.0.len());
        let cleanup = |staged: &[(PathBuf, PathBuf)]| {
            for (tmp, _) in staged {
                let _ = fs::remove_file(tmp);
            }
        };
        for a in &self.0 {
            let target = dir.join(&a.name);
            let tmp = dir.join(format!(".{}.tmp{}", a.name, std::process::id()));
            let written = fs::File::create(&tmp).and_then(|mut f| {
                f.write_all(&a.bytes)?;
                f.sync_all()
            });
            staged.push((tmp.clone(), target));
            if let Err(e) = written {
                cleanup(&staged);
                return Err(Error::io(format!("writing {}", tmp.display()), e));
            }
        }
        for (i, (tmp, target)) in staged.iter().enumerate() {
            if let Err(e) = fs::rename(tmp, target) {
                cleanup(&staged[i..]);
                return Err(Error::io(format!("renaming into {}", target.display()), e));
            }
        }
        Ok(staged.into_iter().map(|s| s.1).collect())
    }
}

fn require(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Error::MissingArtifact(path.display().to_string()))
    }
}

fn read_text(path: &Path) -> Result<String> {
    require(path)?;
    fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

pub fn load_bundle(path: &Path) -> Result<ModelBundle> {
    ModelBundle::from_json(&read_text(path)?)
}

/// `<dir>/<stem>.csv` plus `<dir>/<stem>.json`.
pub fn load_scenario_set(dir: &Path, stem: &str) -> Result<ScenarioSet> {
    let csv = dir.join(format!("{stem}.csv"));
    let json = dir.join(format!("{stem}.json"));
    require(&csv)?;
    require(&json)?;
    let open = |p: &Path| fs::File::open(p).map_err(|e| Error::io(format!("opening {}", p.display()), e));
    read_scenario_set(std::io::BufReader::new(open(&csv)?), std::io::BufReader::new(open(&json)?))
}
