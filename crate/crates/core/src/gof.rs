//! Goodness of fit: Kolmogorov–Smirnov, AIC, QQ data and plot-ready CSV.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::{empirical_quantile, fit_kind, MarginalModel, ModelKind, MIN_SAMPLES};

pub const DEFAULT_ALPHA: f64 = 0.05;

/// Parameters were estimated from the same sample, so the classical p-value
/// is optimistic.
pub const FITTED_CAVEAT: &str = "parameters estimated from the tested sample; K-S p-value is optimistic";

/// Two-sided K-S distance between the sample ECDF and `cdf`.
pub fn ks_statistic<F: Fn(f64) -> f64>(samples: &[f64], cdf: F) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Domain("K-S test on an empty sample".into()));
    }
    if samples.iter().any(|x| x.is_nan()) {
        return Err(Error::Domain("K-S test on a sample containing NaN".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d.clamp(0.0, 1.0))
}

/// Survival function of the Kolmogorov distribution, P(K > λ).
pub fn kolmogorov_sf(lambda: f64) -> f64 {
    if !(lambda > 0.0) {
        return 1.0;
    }
    if lambda < 1.18 {
        // theta-function form converges fast for small λ
        let c = std::f64::consts::PI.powi(2) / (8.0 * lambda * lambda);
        let s: f64 = (1..=8).map(|k| (-((2 * k - 1) as f64).powi(2) * c).exp()).sum();
        (1.0 - (std::f64::consts::TAU).sqrt() / lambda * s).clamp(0.0, 1.0)
    } else {
        let s: f64 = (1..=100)
            .map(|k| {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp()
            })
            .sum();
        (2.0 * s).clamp(0.0, 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

/// K-S statistic and asymptotic p-value at λ = √n·D.
pub fn ks_test(samples: &[f64], model: &MarginalModel) -> Result<KsResult> {
    if samples.len() < 5 {
        return Err(Error::Domain(format!("K-S test needs ≥ 5 samples, got {}", samples.len())));
    }
    let d = ks_statistic(samples, |x| model.cdf(x))?;
    let n = samples.len();
    Ok(KsResult { statistic: d, p_value: kolmogorov_sf((n as f64).sqrt() * d), n })
}

pub fn aic(log_likelihood: f64, n_params: usize) -> f64 {
    2.0 * n_params as f64 - 2.0 * log_likelihood
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub kind: ModelKind,
    pub ks_statistic: f64,
    pub ks_p_value: f64,
    pub log_likelihood: f64,
    pub n_params: usize,
    pub aic: f64,
    pub n: usize,
    pub alpha: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

/// Report for a model fitted to `samples`.
pub fn gof_report(samples: &[f64], model: &MarginalModel, alpha: f64) -> Result<GofReport> {
    let ks = ks_test(samples, model)?;
    let log_likelihood = model.log_likelihood(samples);
    Ok(GofReport {
        kind: model.kind(),
        ks_statistic: ks.statistic,
        ks_p_value: ks.p_value,
        log_likelihood,
        n_params: model.n_params(),
        aic: aic(log_likelihood, model.n_params()),
        n: ks.n,
        alpha,
        pass: ks.p_value >= alpha,
        notes: vec![FITTED_CAVEAT.to_string()],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excluded {
    pub kind: ModelKind,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Ascending AIC; ties keep candidate order.
    pub ranked: Vec<GofReport>,
    pub excluded: Vec<Excluded>,
}

impl Comparison {
    pub fn rank_of(&self, kind: ModelKind) -> Option<usize> {
        self.ranked.iter().position(|r| r.kind == kind).map(|i| i + 1)
    }

    pub fn report(&self, kind: ModelKind) -> Option<&GofReport> {
        self.ranked.iter().find(|r| r.kind == kind)
    }
}

/// Fit every candidate to the same sample and rank by AIC. Candidates that
/// fail to fit are listed with the reason instead of aborting.
pub fn model_comparison(
    samples: &[f64],
    candidates: &[ModelKind],
    splice_quantile: f64,
    alpha: f64,
) -> Result<Comparison> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientData(format!(
            "model comparison needs ≥ {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    let mut ranked = Vec::new();
    let mut excluded = Vec::new();
    for &kind in candidates {
        let outcome = fit_kind(kind, samples, splice_quantile).and_then(|f| {
            let mut r = gof_report(samples, &f.model, alpha)?;
            r.log_likelihood = f.fit.log_likelihood;
            r.aic = aic(f.fit.log_likelihood, r.n_params);
            r.notes.extend(f.fit.notes);
            Ok(r)
        });
        match outcome {
            Ok(r) if r.aic.is_finite() => ranked.push(r),
            Ok(r) => excluded.push(Excluded { kind, reason: format!("non-finite AIC ({})", r.aic) }),
            Err(e) => excluded.push(Excluded { kind, reason: e.to_string() }),
        }
    }
    ranked.sort_by(|a, b| a.aic.total_cmp(&b.aic));
    Ok(Comparison { ranked, excluded })
}

pub enum QqReference<'a> {
    Samples(&'a [f64]),
    Model(&'a MarginalModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QqData {
    pub probabilities: Vec<f64>,
    pub reference: Vec<f64>,
    pub subject: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

impl QqData {
    /// Subject minus reference at each grid point: distance from the diagonal.
    pub fn residuals(&self) -> Vec<f64> {
        self.subject.iter().zip(&self.reference).map(|(s, r)| s - r).collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["p", "reference", "subject", "residual"])?;
        for (i, r) in self.residuals().iter().enumerate() {
            w.write_record([
                self.probabilities[i].to_string(),
                self.reference[i].to_string(),
                self.subject[i].to_string(),
                r.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("writing qq csv", e))?;
        Ok(())
    }
}

fn sorted_copy(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() || xs.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain("QQ input must be non-empty and finite".into()));
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Least-squares line through (x, y): slope, intercept, R².
fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 || syy == 0.0 {
        // a constant side: a perfect fit only if the points coincide
        let same = x.iter().zip(y).all(|(a, b)| a == b);
        let slope = if sxx == 0.0 { 0.0 } else { sxy / sxx };
        return (slope, my - slope * mx, if same { 1.0 } else { 0.0 });
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx, (sxy * sxy / (sxx * syy)).min(1.0))
}

/// Quantile pairs at p = (i − 0.5)/k, i = 1..k.
pub fn qq_data(reference: QqReference<'_>, subject: &[f64], k: usize) -> Result<QqData> {
    if k < 10 {
        return Err(Error::Domain(format!("QQ grid needs k ≥ 10, got {k}")));
    }
    let probabilities: Vec<f64> = (1..=k).map(|i| (i as f64 - 0.5) / k as f64).collect();
    let subj = sorted_copy(subject)?;
    let reference: Vec<f64> = match reference {
        QqReference::Samples(r) => {
            let r = sorted_copy(r)?;
            probabilities.iter().map(|&p| empirical_quantile(&r, p)).collect()
        }
        QqReference::Model(m) => probabilities.iter().map(|&p| m.quantile(p)).collect::<Result<_>>()?,
    };
    let subject: Vec<f64> = probabilities.iter().map(|&p| empirical_quantile(&subj, p)).collect();
    let (slope, intercept, r_squared) = linear_fit(&reference, &subject);
    Ok(QqData { probabilities, reference, subject, slope, intercept, r_squared })
}

/// Step data for the empirical CDF against the model CDF.
pub fn write_ecdf_csv<W: Write>(samples: &[f64], model: &MarginalModel, out: W) -> Result<()> {
    let sorted = sorted_copy(samples)?;
    let n = sorted.len() as f64;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "ecdf", "model_cdf"])?;
    for (i, &x) in sorted.iter().enumerate() {
        w.write_record([x.to_string(), ((i + 1) as f64 / n).to_string(), model.cdf(x).to_string()])?;
    }
    w.flush().map_err(|e| Error::io("writing ecdf csv", e))?;
    Ok(())
}

/// Histogram density on `bins` equal bins next to the model pdf at bin centres.
pub fn write_pdf_overlay_csv<W: Write>(samples: &[f64], model: &MarginalModel, bins: usize, out: W) -> Result<()> {
    let sorted = sorted_copy(samples)?;
    let bins = bins.max(1);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let mut counts = vec![0usize; bins];
    for &x in &sorted {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let n = sorted.len() as f64;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bin_lo", "bin_hi", "x", "histogram_density", "model_pdf"])?;
    for (b, &c) in counts.iter().enumerate() {
        let a = lo + b as f64 * width;
        let x = a + 0.5 * width;
        w.write_record([
            a.to_string(),
            (a + width).to_string(),
            x.to_string(),
            (c as f64 / (n * width)).to_string(),
            model.pdf(x).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("writing pdf overlay csv", e))?;
    Ok(())
}
