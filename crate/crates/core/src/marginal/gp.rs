use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::gev::SHAPE_EPS;
use crate::numeric::nelder_mead;

/// Generalized Pareto law above `location`.
///
/// pdf(x) = (1/σ)(1 + ξ(x-μ)/σ)^(-1/ξ - 1),  cdf(x) = 1 - (1 + ξ(x-μ)/σ)^(-1/ξ)
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpParams {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpFit {
    pub params: GpParams,
    pub log_likelihood: f64,
    pub n: usize,
}

impl GpParams {
    pub fn new(location: f64, scale: f64, shape: f64) -> Result<Self> {
        let p = GpParams { location, scale, shape };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.location.is_finite() || !self.shape.is_finite() {
            return Err(Error::Domain(format!("gp location/shape must be finite: {self:?}")));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Domain(format!("gp scale must be > 0, got {}", self.scale)));
        }
        Ok(())
    }

    pub fn support(&self) -> (f64, f64) {
        if self.shape < -SHAPE_EPS {
            (self.location, self.location - self.scale / self.shape)
        } else {
            (self.location, f64::INFINITY)
        }
    }

    /// ln of the survival function, None above the upper endpoint.
    fn ln_survival(&self, x: f64) -> Option<f64> {
        let z = (x - self.location) / self.scale;
        if self.shape.abs() < SHAPE_EPS {
            Some(-z)
        } else {
            let arg = self.shape * z;
            if arg <= -1.0 {
                None
            } else {
                Some(-arg.ln_1p() / self.shape)
            }
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < self.location {
            return f64::NEG_INFINITY;
        }
        let z = (x - self.location) / self.scale;
        if self.shape.abs() < SHAPE_EPS {
            return -self.scale.ln() - z;
        }
        let arg = self.shape * z;
        if arg <= -1.0 {
            return f64::NEG_INFINITY;
        }
        -self.scale.ln() - (1.0 / self.shape + 1.0) * arg.ln_1p()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.location {
            return 0.0;
        }
        match self.ln_survival(x) {
            Some(ls) => -ls.exp_m1(),
            None => 1.0,
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let ls = (-p).ln_1p();
        if self.shape.abs() < SHAPE_EPS {
            self.location - self.scale * ls
        } else {
            self.location + self.scale * (-self.shape * ls).exp_m1() / self.shape
        }
    }

    /// Likelihood fit of scale and shape with the location held fixed.
    /// Every sample must be ≥ `location`.
    pub fn fit_mle(samples: &[f64], location: f64) -> Result<GpFit> {
        let n = samples.len();
        if n < 3 {
            return Err(Error::InsufficientData(format!("gp fit needs ≥ 3 samples, got {n}")));
        }
        if samples.iter().any(|&x| !x.is_finite() || x < location) {
            return Err(Error::Domain("gp fit: samples must be finite and ≥ location".into()));
        }
        let excess: Vec<f64> = samples.iter().map(|x| x - location).collect();
        let mean = excess.iter().sum::<f64>() / n as f64;
        let var = excess.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
        if !(mean > 0.0) || !(var > 0.0) {
            return Err(Error::Estimation("gp fit: excesses have no spread".into()));
        }
        let ratio = mean * mean / var;
        let shape0 = (0.5 * (1.0 - ratio)).clamp(-0.4, 0.9);
        let scale0 = (mean * (1.0 - shape0)).max(1e-3 * mean);
        let max_excess = excess.iter().cloned().fold(0.0, f64::max);

        let nll = |p: &[f64]| -> f64 {
            let (scale, shape) = (p[0].exp(), p[1]);
            if !(-1.0..=3.0).contains(&shape) {
                return f64::INFINITY;
            }
            if shape < 0.0 && max_excess >= -scale / shape {
                return f64::INFINITY;
            }
            let g = GpParams { location: 0.0, scale, shape };
            -excess.iter().map(|&y| g.ln_pdf(y)).sum::<f64>()
        };
        let mut x0 = vec![scale0.ln(), shape0];
        let mut tries = 0;
        while !nll(&x0).is_finite() && tries < 60 {
            x0[0] += 0.2;
            tries += 1;
        }
        let mut best = nelder_mead(nll, &x0, &[0.1, 0.05], 1e-12, 4000);
        for _ in 0..3 {
            let next = nelder_mead(nll, &best.x, &[0.05, 0.02], 1e-12, 4000);
            let improved = next.value < best.value - 1e-10 * best.value.abs().max(1.0);
            best = next;
            if !improved {
                break;
            }
        }
        if !best.value.is_finite() {
            return Err(Error::Estimation("gp fit: likelihood search diverged".into()));
        }
        Ok(GpFit {
            params: GpParams::new(location, best.x[0].exp(), best.x[1])?,
            log_likelihood: -best.value,
            n,
        })
    }
}
