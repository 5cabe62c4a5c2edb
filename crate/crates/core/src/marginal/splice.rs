//! GEV body spliced to a GP tail at a threshold.
//!
//! ```text
//! F(x) = (1 - p)·G(x)/G(u)      x < u
//!        1 - p·(1 - H(x))       x ≥ u
//! ```
//! where G is the GEV cdf, H the GP cdf with location u, and p the tail mass.
//! Both branches equal 1 - p at u, so F is continuous.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::gev::GevParams;
use crate::marginal::gp::GpParams;

pub const MIN_SAMPLES: usize = 200;
pub const MIN_EXCEEDANCES: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevGpSplice {
    pub body: GevParams,
    pub tail: GpParams,
    pub threshold: f64,
    pub tail_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpliceFit {
    pub splice: GevGpSplice,
    pub log_likelihood: f64,
    pub n: usize,
    pub n_exceedances: usize,
}

/// Type-7 (linear interpolation) empirical quantile of sorted data.
pub(crate) fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl GevGpSplice {
    pub fn new(body: GevParams, tail: GpParams, threshold: f64, tail_mass: f64) -> Result<Self> {
        let s = GevGpSplice { body, tail, threshold, tail_mass };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.body.validate()?;
        self.tail.validate()?;
        if !self.threshold.is_finite() || self.tail.location != self.threshold {
            return Err(Error::Domain(format!(
                "splice tail must start at the threshold ({} vs {})",
                self.tail.location, self.threshold
            )));
        }
        if !(0.0..1.0).contains(&self.tail_mass) {
            return Err(Error::Domain(format!("splice tail mass must be in [0,1), got {}", self.tail_mass)));
        }
        if self.body.cdf(self.threshold) <= 0.0 {
            return Err(Error::Domain("splice threshold lies below the GEV support".into()));
        }
        Ok(())
    }

    /// Number of free parameters: GEV (3) + GP scale/shape (2) + tail mass.
    pub const N_PARAMS: usize = 6;

    fn body_norm(&self) -> f64 {
        self.body.cdf(self.threshold)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.threshold {
            (1.0 - self.tail_mass) * self.body.cdf(x) / self.body_norm()
        } else {
            1.0 - self.tail_mass * (1.0 - self.tail.cdf(x))
        }
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < self.threshold {
            (1.0 - self.tail_mass).ln() + self.body.ln_pdf(x) - self.body_norm().ln()
        } else {
            self.tail_mass.ln() + self.tail.ln_pdf(x)
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let split = 1.0 - self.tail_mass;
        if p < split {
            self.body.quantile(p * self.body_norm() / split)
        } else {
            let h = 1.0 - (1.0 - p) / self.tail_mass;
            self.tail.quantile(h.clamp(0.0, 1.0 - f64::EPSILON))
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.body.support().0, self.tail.support().1)
    }

    /// Fit the splice: threshold at the empirical `q_u`-quantile, a GEV to
    /// the body by likelihood truncated at the threshold, and a GP to the
    /// exceedances.
    pub fn fit(samples: &[f64], q_u: f64) -> Result<SpliceFit> {
        let n = samples.len();
        if n < MIN_SAMPLES {
            return Err(Error::InsufficientData(format!(
                "splice fit needs ≥ {MIN_SAMPLES} samples, got {n}"
            )));
        }
        if !(0.8..=0.99).contains(&q_u) {
            return Err(Error::Domain(format!("splice quantile must be in [0.8, 0.99], got {q_u}")));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("splice fit: non-finite sample".into()));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let threshold = empirical_quantile(&sorted, q_u);

        let (body, tail): (Vec<f64>, Vec<f64>) = samples.iter().partition(|&&x| x <= threshold);
        if tail.len() < MIN_EXCEEDANCES {
            return Err(Error::TailSparsity {
                threshold,
                count: tail.len(),
                required: MIN_EXCEEDANCES,
            });
        }
        let tail_mass = tail.len() as f64 / n as f64;
        let gev = GevParams::fit_truncated(&body, Some(threshold))?;
        let gp = GpParams::fit_mle(&tail, threshold)?;
        let splice = GevGpSplice::new(gev.params, gp.params, threshold, tail_mass)?;
        let log_likelihood = samples.iter().map(|&x| splice.ln_pdf(x)).sum();
        Ok(SpliceFit {
            splice,
            log_likelihood,
            n,
            n_exceedances: tail.len(),
        })
    }
}
