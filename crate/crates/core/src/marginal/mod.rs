//! Parametric marginal laws for wind speed, irradiance and precipitation.

mod beta;
mod gev;
mod gp;
mod splice;
mod weibull;

pub use beta::BetaParams;
pub use gev::{GevFit, GevParams};
pub use gp::{GpFit, GpParams};
pub use splice::{GevGpSplice, SpliceFit, MIN_EXCEEDANCES, MIN_SAMPLES};
pub use weibull::{FitWarning, WeibullParams};

pub(crate) use splice::empirical_quantile;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::open_unit;

/// Model family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Weibull,
    Beta,
    Gev,
    Gp,
    GevGpSplice,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::Weibull,
        ModelKind::Beta,
        ModelKind::Gev,
        ModelKind::Gp,
        ModelKind::GevGpSplice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Weibull => "weibull",
            ModelKind::Beta => "beta",
            ModelKind::Gev => "gev",
            ModelKind::Gp => "gp",
            ModelKind::GevGpSplice => "gev_gp_splice",
        }
    }
}

/// A fully parameterised marginal distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameters", rename_all = "snake_case")]
pub enum MarginalModel {
    Weibull(WeibullParams),
    Beta(BetaParams),
    Gev(GevParams),
    Gp(GpParams),
    GevGpSplice(GevGpSplice),
}

impl MarginalModel {
    pub fn kind(&self) -> ModelKind {
        match self {
            MarginalModel::Weibull(_) => ModelKind::Weibull,
            MarginalModel::Beta(_) => ModelKind::Beta,
            MarginalModel::Gev(_) => ModelKind::Gev,
            MarginalModel::Gp(_) => ModelKind::Gp,
            MarginalModel::GevGpSplice(_) => ModelKind::GevGpSplice,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MarginalModel::Weibull(p) => p.validate(),
            MarginalModel::Beta(p) => p.validate(),
            MarginalModel::Gev(p) => p.validate(),
            MarginalModel::Gp(p) => p.validate(),
            MarginalModel::GevGpSplice(p) => p.validate(),
        }
    }

    /// Number of estimated parameters (for AIC).
    pub fn n_params(&self) -> usize {
        match self {
            MarginalModel::Weibull(_) | MarginalModel::Beta(_) => 2,
            MarginalModel::Gev(_) | MarginalModel::Gp(_) => 3,
            MarginalModel::GevGpSplice(_) => GevGpSplice::N_PARAMS,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            MarginalModel::Weibull(p) => p.pdf(x),
            MarginalModel::Beta(p) => p.pdf(x),
            MarginalModel::Gev(p) => p.pdf(x),
            MarginalModel::Gp(p) => p.pdf(x),
            MarginalModel::GevGpSplice(p) => p.pdf(x),
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            MarginalModel::Weibull(p) => p.ln_pdf(x),
            MarginalModel::Beta(p) => p.ln_pdf(x),
            MarginalModel::Gev(p) => p.ln_pdf(x),
            MarginalModel::Gp(p) => p.ln_pdf(x),
            MarginalModel::GevGpSplice(p) => p.ln_pdf(x),
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            MarginalModel::Weibull(p) => p.cdf(x),
            MarginalModel::Beta(p) => p.cdf(x),
            MarginalModel::Gev(p) => p.cdf(x),
            MarginalModel::Gp(p) => p.cdf(x),
            MarginalModel::GevGpSplice(p) => p.cdf(x),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        match self {
            MarginalModel::Weibull(_) => (0.0, f64::INFINITY),
            MarginalModel::Beta(_) => (0.0, 1.0),
            MarginalModel::Gev(p) => p.support(),
            MarginalModel::Gp(p) => p.support(),
            MarginalModel::GevGpSplice(p) => p.support(),
        }
    }

    /// Inverse cdf for p ∈ (0, 1).
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile probability must be in (0,1), got {p}")));
        }
        Ok(self.quantile_unchecked(p))
    }

    pub(crate) fn quantile_unchecked(&self, p: f64) -> f64 {
        match self {
            MarginalModel::Weibull(m) => m.quantile(p),
            MarginalModel::Beta(m) => m.quantile(p),
            MarginalModel::Gev(m) => m.quantile(p),
            MarginalModel::Gp(m) => m.quantile(p),
            MarginalModel::GevGpSplice(m) => m.quantile(p),
        }
    }

    /// Inverse-cdf sampling from a caller-owned stream.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.quantile_unchecked(open_unit(rng))).collect()
    }

    pub fn log_likelihood(&self, samples: &[f64]) -> f64 {
        samples.iter().map(|&x| self.ln_pdf(x)).sum()
    }
}

/// Estimation record stored next to a fitted model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitMetadata {
    pub n: usize,
    pub log_likelihood: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// A marginal model together with how it was obtained. Serialises as
/// `{"kind": .., "parameters": {..}, "fit": {..}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    #[serde(flatten)]
    pub model: MarginalModel,
    pub fit: FitMetadata,
}

impl FittedModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: FittedModel = serde_json::from_str(text)?;
        m.model.validate()?;
        Ok(m)
    }
}

fn sample_mean_std(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Fit a model of the requested family to raw samples.
///
/// Weibull and Beta use moment matching; GEV and GP use maximum likelihood
/// (the GP location is pinned at the sample minimum); the splice uses
/// `splice_quantile` as its threshold level.
pub fn fit_kind(kind: ModelKind, samples: &[f64], splice_quantile: f64) -> Result<FittedModel> {
    let n = samples.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("{} fit needs ≥ 3 samples, got {n}", kind.name())));
    }
    let mut notes = Vec::new();
    let mut threshold = None;
    let (model, log_likelihood) = match kind {
        ModelKind::Weibull => {
            if samples.iter().any(|&x| x < 0.0) {
                return Err(Error::Domain("weibull fit: negative sample".into()));
            }
            let (mean, std) = sample_mean_std(samples);
            let (p, warning) = WeibullParams::fit_moments(mean, std)?;
            if let Some(w) = warning {
                notes.push(format!("{w:?}"));
            }
            let m = MarginalModel::Weibull(p);
            (m, m.log_likelihood(samples))
        }
        ModelKind::Beta => {
            if samples.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
                return Err(Error::Domain("beta fit: samples must lie in [0,1]".into()));
            }
            let (mean, std) = sample_mean_std(samples);
            let m = MarginalModel::Beta(BetaParams::fit_moments(mean, std)?);
            (m, m.log_likelihood(samples))
        }
        ModelKind::Gev => {
            let f = GevParams::fit_mle(samples)?;
            (MarginalModel::Gev(f.params), f.log_likelihood)
        }
        ModelKind::Gp => {
            let location = samples.iter().cloned().fold(f64::INFINITY, f64::min);
            let f = GpParams::fit_mle(samples, location)?;
            threshold = Some(location);
            (MarginalModel::Gp(f.params), f.log_likelihood)
        }
        ModelKind::GevGpSplice => {
            let f = GevGpSplice::fit(samples, splice_quantile)?;
            threshold = Some(f.splice.threshold);
            notes.push(format!("tail exceedances: {}", f.n_exceedances));
            (MarginalModel::GevGpSplice(f.splice), f.log_likelihood)
        }
    };
    Ok(FittedModel {
        model,
        fit: FitMetadata {
            n,
            log_likelihood,
            threshold,
            notes,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    pub(crate) fn zoo() -> Vec<MarginalModel> {
        let body = GevParams::new(0.9, 0.8, 0.1).unwrap();
        let u = body.quantile(0.93);
        vec![
            MarginalModel::Weibull(WeibullParams::new(2.1, 6.0).unwrap()),
            MarginalModel::Beta(BetaParams::new(2.5, 3.5).unwrap()),
            MarginalModel::Gev(GevParams::new(11.892, 8.0, -0.175).unwrap()),
            MarginalModel::Gp(GpParams::new(0.189, 0.954, 0.051).unwrap()),
            MarginalModel::GevGpSplice(
                GevGpSplice::new(body, GpParams::new(u, 1.2, 0.15).unwrap(), u, 0.05).unwrap(),
            ),
        ]
    }

    #[test]
    fn quantile_domain() {
        let m = zoo()[0];
        assert!(m.quantile(0.0).is_err());
        assert!(m.quantile(1.0).is_err());
        assert!(m.quantile(f64::NAN).is_err());
        assert!(m.quantile(0.5).is_ok());
    }

    #[test]
    fn weibull_quantile_known_point() {
        let m = MarginalModel::Weibull(WeibullParams::new(2.0, 1.0).unwrap());
        assert!((m.quantile(1.0 - (-1f64).exp()).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn sampling_is_deterministic() {
        for m in zoo() {
            let a = m.sample(&mut stream(3, 1), 50);
            let b = m.sample(&mut stream(3, 1), 50);
            assert_eq!(a, b);
        }
    }

    #[test]
    fn json_shape() {
        let fitted = FittedModel {
            model: zoo()[2],
            fit: FitMetadata { n: 10, log_likelihood: -1.5, threshold: None, notes: vec![] },
        };
        let v: serde_json::Value = serde_json::from_str(&fitted.to_json().unwrap()).unwrap();
        assert_eq!(v["kind"], "gev");
        assert_eq!(v["parameters"]["shape"], -0.175);
        assert_eq!(v["fit"]["n"], 10);
    }

    #[test]
    fn fit_kind_recovers_family_parameters() {
        let mut rng = stream(8, 0);
        let truth = MarginalModel::Weibull(WeibullParams::new(2.0, 6.0).unwrap());
        let xs = truth.sample(&mut rng, 20_000);
        let fitted = fit_kind(ModelKind::Weibull, &xs, 0.95).unwrap();
        let MarginalModel::Weibull(p) = fitted.model else { panic!() };
        // the empirical shape relation is an approximation of the true one
        assert!((p.shape - 2.0).abs() < 0.06, "{p:?}");
        assert!(fit_kind(ModelKind::Beta, &xs, 0.95).is_err());
    }
}
