use std::path::{Path, PathBuf};
use std::process::ExitCode;

use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};

use wxscen::pipeline::*;
use wxscen::ut::InputMoments;
use wxscen::{Error, Result};

// Summaries are best effort: a closed pipe (`wxscen tree | head`) must not
// turn a successful run into a panic.
macro_rules! say {
    ($($arg:tt)*) => {{
        use std::io::Write as _;
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

#[derive(Parser)]
#[command(name = "wxscen", version, about = "Wind/PV scenario generation under consecutive anomalous weather")]
struct Cli {
    /// JSON pipeline configuration; defaults apply to absent keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overrides the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; also where later stages look for earlier artifacts.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DateRange {
    /// First day to keep (inclusive, YYYY-MM-DD).
    #[arg(long)]
    from: Option<NaiveDate>,
    /// Last day to keep (inclusive, YYYY-MM-DD).
    #[arg(long)]
    to: Option<NaiveDate>,
}

impl DateRange {
    fn filter(&self) -> DateFilter {
        DateFilter { from: self.from, to: self.to }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Clean an hourly weather CSV and write dataset.csv.
    Ingest {
        data: PathBuf,
        #[command(flatten)]
        range: DateRange,
    },
    /// Fit marginals, copula and hourly climatology; writes models.json.
    Fit {
        /// Weather CSV (defaults to <out>/dataset.csv).
        data: Option<PathBuf>,
        #[command(flatten)]
        range: DateRange,
    },
    /// Build the 16-cell anomalous scenario tree.
    Tree {
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Generate scenario sets.
    Generate {
        #[arg(long, default_value = "normal")]
        mode: GenerateMode,
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Propagate input moments through the power curves.
    Ut {
        /// JSON file with `mean` and `covariance`; without it every hour of
        /// the fitted climatology is propagated.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long)]
        models: Option<PathBuf>,
    },
    /// Goodness-of-fit and QQ validation of the fitted models and scenarios.
    Validate {
        /// Weather CSV (defaults to <out>/dataset.csv).
        data: Option<PathBuf>,
        #[command(flatten)]
        range: DateRange,
        #[arg(long)]
        models: Option<PathBuf>,
    },
}

fn read_to_string(path: &Path) -> Result<String> {
    if !path.is_file() {
        return Err(Error::MissingArtifact(path.display().to_string()));
    }
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn write_all(out: &Artifacts, dir: &Path) -> Result<()> {
    for p in out.commit(dir)? {
        say!("wrote {}", p.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if cli.seed.is_some() {
        config.seed = cli.seed;
    }
    config.validate()?;
    let out = cli.out.as_path();
    let bundle_at = |p: &Option<PathBuf>| load_bundle(&p.clone().unwrap_or_else(|| out.join(MODELS_FILE)));
    let dataset_at = |p: &Option<PathBuf>, range: &DateRange| {
        WeatherDataset::load(&p.clone().unwrap_or_else(|| out.join("dataset.csv")), range.filter())
    };

    match &cli.command {
        Command::Ingest { data, range } => {
            let d = WeatherDataset::load(data, range.filter())?;
            let r = &d.report;
            say!(
                "{} rows read, {} dropped, {} outside range, {} gaps, {} kept",
                r.rows_read,
                r.rows_dropped,
                r.rows_outside_filter,
                r.gaps.len(),
                d.records.len()
            );
            write_all(&cmd_ingest(&d)?, out)
        }
        Command::Fit { data, range } => {
            let d = dataset_at(data, range)?;
            let (b, artifacts) = cmd_fit(&d, &config)?;
            say!("wind   {}", serde_json::to_string(&b.wind.model)?);
            say!("precip {}", serde_json::to_string(&b.precip.model)?);
            say!("copula theta {:.4} (tau {:.4})", b.copula.theta, b.copula.kendall_tau);
            write_all(&artifacts, out)
        }
        Command::Tree { models } => {
            let (tree, artifacts) = cmd_tree(&bundle_at(models)?, &config)?;
            say!("{}", tree.to_text().trim_end());
            write_all(&artifacts, out)
        }
        Command::Generate { mode, models } => {
            let (g, artifacts) = cmd_generate(&bundle_at(models)?, &config, *mode)?;
            for (stem, set) in &g.reduced {
                say!("{stem}: {} scenarios from {}", set.len(), set.metadata.n_generated);
            }
            if let Some(e) = &g.energy {
                say!(
                    "expected energy {:.1} kWh; max scenario {}, min scenario {}",
                    e.expected_energy_kwh, e.max_energy_scenario, e.min_energy_scenario
                );
            }
            write_all(&artifacts, out)
        }
        Command::Ut { input, models } => {
            let input: Option<InputMoments> = match input {
                Some(p) => Some(serde_json::from_str(&read_to_string(p)?)?),
                None => None,
            };
            let bundle = match (&input, models) {
                (Some(_), None) => None,
                _ => Some(bundle_at(models)?),
            };
            let (report, artifacts) = cmd_ut(bundle.as_ref(), &config, input)?;
            for c in &report.cases {
                let hour = c.hour.map_or("input".to_string(), |h| format!("hour {h:02}"));
                let sd = c.output.std_dev();
                say!(
                    "{hour}: wind {:.1} ± {:.1} kW, pv {:.1} ± {:.1} kW",
                    c.output.mean[0], sd[0], c.output.mean[1], sd[1]
                );
            }
            write_all(&artifacts, out)
        }
        Command::Validate { data, range, models } => {
            let bundle = bundle_at(models)?;
            let normal = load_scenario_set(out, "normal_raw")?;
            let d = dataset_at(data, range)?;
            let (report, artifacts) = cmd_validate(&bundle, &d, &normal, &config)?;
            for g in [&report.wind, &report.precip] {
                say!(
                    "{}: K-S D {:.4} p {:.3} ({}), AIC {:.1}",
                    g.kind.name(),
                    g.ks_statistic,
                    g.ks_p_value,
                    if g.pass { "pass" } else { "reject" },
                    g.aic
                );
            }
            for q in &report.qq {
                say!("qq {}: R² {:.5}", q.name, q.r_squared);
            }
            write_all(&artifacts, out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
