use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::numeric::nelder_mead;

/// Below this |ξ| the Gumbel limit is used.
pub(crate) const SHAPE_EPS: f64 = 1e-12;

/// Generalized extreme value law.
///
/// ```text
/// t(x) = (1 + ξ(x-μ)/σ)^(-1/ξ)   ξ ≠ 0
///        exp(-(x-μ)/σ)           ξ = 0
/// pdf  = t^(ξ+1)·e^(-t) / σ,  cdf = e^(-t)
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GevParams {
    pub location: f64,
    pub scale: f64,
    pub shape: f64,
}

/// Result of a likelihood fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GevFit {
    pub params: GevParams,
    pub log_likelihood: f64,
    pub n: usize,
}

impl GevParams {
    pub fn new(location: f64, scale: f64, shape: f64) -> Result<Self> {
        let p = GevParams { location, scale, shape };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.location.is_finite() || !self.shape.is_finite() {
            return Err(Error::Domain(format!("gev location/shape must be finite: {self:?}")));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Domain(format!("gev scale must be > 0, got {}", self.scale)));
        }
        Ok(())
    }

    /// Support as a (lower, upper) pair; infinite ends where unbounded.
    pub fn support(&self) -> (f64, f64) {
        if self.shape.abs() < SHAPE_EPS {
            (f64::NEG_INFINITY, f64::INFINITY)
        } else if self.shape > 0.0 {
            (self.location - self.scale / self.shape, f64::INFINITY)
        } else {
            (f64::NEG_INFINITY, self.location - self.scale / self.shape)
        }
    }

    /// ln t(x), or None outside the support.
    fn ln_t(&self, x: f64) -> Option<f64> {
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
        match self.ln_t(x) {
            Some(lt) => -self.scale.ln() + (self.shape + 1.0) * lt - lt.exp(),
            None => f64::NEG_INFINITY,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.ln_t(x) {
            Some(lt) => (-lt.exp()).exp(),
            None => {
                if self.shape > 0.0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let y = -p.ln();
        if self.shape.abs() < SHAPE_EPS {
            self.location - self.scale * y.ln()
        } else {
            self.location + self.scale * (-self.shape * y.ln()).exp_m1() / self.shape
        }
    }

    /// Probability-weighted-moment estimate, used to start the likelihood
    /// search.
    pub fn pwm_estimate(samples: &[f64]) -> Result<Self> {
        let n = samples.len();
        if n < 3 {
            return Err(Error::InsufficientData(format!("gev fit needs ≥ 3 samples, got {n}")));
        }
        let mut xs = samples.to_vec();
        xs.sort_by(f64::total_cmp);
        let nf = n as f64;
        let (mut b0, mut b1, mut b2) = (0.0, 0.0, 0.0);
        for (i, &x) in xs.iter().enumerate() {
            let i = i as f64;
            b0 += x;
            b1 += x * i / (nf - 1.0);
            b2 += x * i * (i - 1.0) / ((nf - 1.0) * (nf - 2.0));
        }
        b0 /= nf;
        b1 /= nf;
        b2 /= nf;

        let c = (2.0 * b1 - b0) / (3.0 * b2 - b0) - 2f64.ln() / 3f64.ln();
        let k = 7.8590 * c + 2.9554 * c * c;
        let (scale, location) = if k.abs() < 1e-6 {
            let s = (2.0 * b1 - b0) / 2f64.ln();
            (s, b0 - 0.577_215_664_901_532_9 * s)
        } else {
            let g = gamma(1.0 + k);
            let s = (2.0 * b1 - b0) * k / (g * (1.0 - 2f64.powf(-k)));
            (s, b0 + s * (g - 1.0) / k)
        };
        let guess = GevParams { location, scale, shape: -k };
        if guess.validate().is_ok() {
            return Ok(guess);
        }
        // Gumbel moment fallback
        let mean = b0;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
        let s = (6.0 * var).sqrt() / std::f64::consts::PI;
        GevParams::new(mean - 0.577_215_664_901_532_9 * s, s.max(1e-12), 0.0)
    }

    /// Maximum-likelihood fit by Nelder–Mead over (μ, ln σ, ξ), started from
    /// probability-weighted moments.
    pub fn fit_mle(samples: &[f64]) -> Result<GevFit> {
        Self::fit_truncated(samples, None)
    }

    /// Likelihood fit of a GEV observed only below `upper`
    /// (density renormalised by G(upper)). With `None` this is the plain fit.
    pub fn fit_truncated(samples: &[f64], upper: Option<f64>) -> Result<GevFit> {
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("gev fit: non-finite sample".into()));
        }
        let start = Self::pwm_estimate(samples)?;
        let n = samples.len();
        let nll = |p: &[f64]| -> f64 {
            let shape = p[2];
            if !(-0.95..=2.0).contains(&shape) {
                return f64::INFINITY;
            }
            let g = GevParams { location: p[0], scale: p[1].exp(), shape };
            let mut ll = 0.0;
            for &x in samples {
                ll += g.ln_pdf(x);
                if ll == f64::NEG_INFINITY {
                    return f64::INFINITY;
                }
            }
            if let Some(u) = upper {
                let gu = g.cdf(u);
                if gu <= 0.0 {
                    return f64::INFINITY;
                }
                ll -= n as f64 * gu.ln();
            }
            -ll
        };

        let mut x0 = vec![start.location, start.scale.ln(), start.shape.clamp(-0.9, 1.9)];
        // pull the start inside the support if the PWM guess excludes data
        let mut tries = 0;
        while !nll(&x0).is_finite() && tries < 60 {
            x0[2] *= 0.5;
            x0[1] += 0.1;
            tries += 1;
        }
        if !nll(&x0).is_finite() {
            return Err(Error::Estimation("gev fit: no feasible starting point".into()));
        }

        let mut best = nelder_mead(nll, &x0, &[0.1 * start.scale, 0.1, 0.05], 1e-12, 4000);
        for _ in 0..4 {
            let scale = best.x[1].exp();
            let next = nelder_mead(nll, &best.x, &[0.05 * scale, 0.05, 0.02], 1e-12, 4000);
            let improved = next.value < best.value - 1e-10 * best.value.abs().max(1.0);
            best = next;
            if !improved {
                break;
            }
        }
        if !best.value.is_finite() {
            return Err(Error::Estimation("gev fit: likelihood search diverged".into()));
        }
        let params = GevParams::new(best.x[0], best.x[1].exp(), best.x[2])?;
        Ok(GevFit {
            params,
            log_likelihood: -best.value,
            n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;
    use crate::rng::{open_unit, stream};

    fn table4_wind() -> GevParams {
        GevParams::new(11.892, 8.0, -0.175).unwrap()
    }

    #[test]
    fn gumbel_cdf_at_location() {
        let g = GevParams::new(3.0, 2.0, 0.0).unwrap();
        assert!((g.cdf(3.0) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn table4_wind_cdf_is_monotone_on_support() {
        let g = table4_wind();
        let (_, hi) = g.support();
        let mut prev = 0.0;
        for i in 0..=2000 {
            let x = -20.0 + (hi + 20.0) * i as f64 / 2000.0;
            let c = g.cdf(x);
            assert!(c >= prev);
            prev = c;
        }
        assert_eq!(g.cdf(hi + 1.0), 1.0);
    }

    #[test]
    fn densities_normalise() {
        for g in [
            table4_wind(),
            GevParams::new(0.0, 1.0, 0.0).unwrap(),
            GevParams::new(1.0, 0.5, 0.3).unwrap(),
        ] {
            let (lo, hi) = g.support();
            let lo = if lo.is_finite() { lo } else { g.quantile(1e-16) };
            let hi = if hi.is_finite() { hi } else { g.quantile(1.0 - 1e-16) };
            // heavy right tail: integrate in pieces, add the missing mass analytically
            let body = integrate(&|x| g.pdf(x), lo, hi, 1e-11);
            let missing = 1.0 - g.cdf(hi) + g.cdf(lo);
            assert!((body + missing - 1.0).abs() < 1e-6, "{g:?}: {body}");
        }
    }

    #[test]
    fn quantile_round_trip() {
        for g in [table4_wind(), GevParams::new(0.0, 1.0, 0.0).unwrap(), GevParams::new(1.0, 0.5, 0.3).unwrap()] {
            for p in [1e-6, 0.01, 0.3, 0.5, 0.9, 0.999999] {
                let x = g.quantile(p);
                assert!((g.cdf(x) - p).abs() < 1e-12, "{g:?} p={p}");
            }
        }
    }

    #[test]
    fn mle_recovers_table4_wind() {
        let g = table4_wind();
        let mut rng = stream(11, 0);
        let xs: Vec<f64> = (0..20_000).map(|_| g.quantile(open_unit(&mut rng))).collect();
        let fit = GevParams::fit_mle(&xs).unwrap();
        assert!((fit.params.location - 11.892).abs() / 11.892 < 0.02, "{:?}", fit.params);
        assert!((fit.params.scale - 8.0).abs() / 8.0 < 0.03, "{:?}", fit.params);
        assert!((fit.params.shape + 0.175).abs() < 0.03, "{:?}", fit.params);
        // the optimum beats the truth on its own sample
        let ll_true: f64 = xs.iter().map(|&x| g.ln_pdf(x)).sum();
        assert!(fit.log_likelihood >= ll_true);
    }

    #[test]
    fn outside_support_is_zero() {
        let g = GevParams::new(0.0, 1.0, 0.5).unwrap();
        assert_eq!(g.pdf(-3.0), 0.0);
        assert_eq!(g.cdf(-3.0), 0.0);
    }
}
