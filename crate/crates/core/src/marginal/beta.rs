use serde::{Deserialize, Serialize};
use statrs::function::beta::{beta_reg, ln_beta};

use crate::error::{Error, Result};
use crate::numeric::bisect_increasing;

/// Beta law for irradiance normalised to [0, 1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaParams {
    pub alpha: f64,
    pub beta: f64,
}

/// a·ln(x), with the 0·ln(0) = 0 convention.
fn xlogy(a: f64, x: f64) -> f64 {
    if a == 0.0 {
        0.0
    } else {
        a * x.ln()
    }
}

impl BetaParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let p = BetaParams { alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("beta {name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Method-of-moments fit from mean μ ∈ (0,1) and standard deviation σ.
    pub fn fit_moments(mean: f64, std: f64) -> Result<Self> {
        let variance = std * std;
        if !(mean > 0.0 && mean < 1.0) || !(std > 0.0 && std.is_finite()) {
            return Err(Error::Domain(format!(
                "beta moment fit needs 0 < mean < 1 and std > 0, got mean {mean}, std {std}"
            )));
        }
        let spread = mean * (1.0 - mean);
        if variance >= spread {
            return Err(Error::InfeasibleMoments { mean, variance });
        }
        let common = spread / variance - 1.0;
        BetaParams::new(mean * common, (1.0 - mean) * common)
    }

    pub fn pdf(&self, s: f64) -> f64 {
        if !(0.0..=1.0).contains(&s) {
            return 0.0;
        }
        self.ln_pdf(s).exp()
    }

    pub fn ln_pdf(&self, s: f64) -> f64 {
        if !(0.0..=1.0).contains(&s) {
            return f64::NEG_INFINITY;
        }
        xlogy(self.alpha - 1.0, s) + xlogy(self.beta - 1.0, 1.0 - s) - ln_beta(self.alpha, self.beta)
    }

    pub fn cdf(&self, s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s >= 1.0 {
            1.0
        } else {
            beta_reg(self.alpha, self.beta, s).clamp(0.0, 1.0)
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        bisect_increasing(|s| self.cdf(s), p, 0.0, 1.0)
    }

    pub fn mean(&self) -> f64 {
        self.alpha / (self.alpha + self.beta)
    }

    pub fn variance(&self) -> f64 {
        let s = self.alpha + self.beta;
        self.alpha * self.beta / (s * s * (s + 1.0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;

    #[test]
    fn symmetric_moment_fit() {
        let p = BetaParams::fit_moments(0.5, 0.05f64.sqrt()).unwrap();
        assert!((p.alpha - 2.0).abs() < 1e-12);
        assert!((p.beta - 2.0).abs() < 1e-12);
        for std in [0.01, 0.1, 0.3, 0.49] {
            let p = BetaParams::fit_moments(0.5, std).unwrap();
            assert!((p.alpha - p.beta).abs() < 1e-12 * p.alpha);
        }
    }

    #[test]
    fn moment_round_trip() {
        for (m, s) in [(0.2, 0.1), (0.7, 0.05), (0.45, 0.3), (0.01, 0.005)] {
            let p = BetaParams::fit_moments(m, s).unwrap();
            assert!((p.mean() - m).abs() < 1e-9);
            assert!((p.variance() - s * s).abs() < 1e-9);
        }
    }

    #[test]
    fn infeasible_moments_rejected() {
        assert!(matches!(
            BetaParams::fit_moments(0.5, 0.5),
            Err(Error::InfeasibleMoments { .. })
        ));
        assert!(matches!(BetaParams::fit_moments(1.2, 0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn uniform_and_known_density() {
        let u = BetaParams::new(1.0, 1.0).unwrap();
        for s in [0.0, 0.1, 0.5, 0.99, 1.0] {
            assert!((u.pdf(s) - 1.0).abs() < 1e-14);
        }
        let p = BetaParams::new(2.0, 2.0).unwrap();
        assert!((p.pdf(0.5) - 1.5).abs() < 1e-14);
        assert_eq!(p.pdf(-0.1), 0.0);
        assert_eq!(p.pdf(1.1), 0.0);
    }

    #[test]
    fn density_normalises_and_cdf_clamps() {
        let p = BetaParams::new(2.5, 4.0).unwrap();
        let total = integrate(&|s| p.pdf(s), 0.0, 1.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-8);
        assert_eq!(p.cdf(-1.0), 0.0);
        assert_eq!(p.cdf(1.0), 1.0);
        assert_eq!(p.cdf(2.0), 1.0);
    }

    #[test]
    fn quantile_round_trip() {
        let p = BetaParams::new(3.0, 1.7).unwrap();
        for q in [0.001, 0.2, 0.5, 0.9, 0.999] {
            assert!((p.cdf(p.quantile(q)) - q).abs() < 1e-10);
        }
    }
}
