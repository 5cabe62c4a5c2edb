use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// Empirical exponent relating the coefficient of variation to the shape.
const SHAPE_EXPONENT: f64 = -1.086;

/// Two-parameter Weibull law for wind speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeibullParams {
    /// shape k
    pub shape: f64,
    /// scale c, m/s
    pub scale: f64,
}

/// Non-fatal note attached to a moment fit.
#[derive(Debug, Clone, PartialEq)]
pub enum FitWarning {
    /// Relative dispersion so large that the empirical shape relation is
    /// being used far outside its calibrated range.
    ExtremeDispersion { ratio: f64, shape: f64 },
}

impl WeibullParams {
    pub fn new(shape: f64, scale: f64) -> Result<Self> {
        let p = WeibullParams { shape, scale };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.shape > 0.0 && self.shape.is_finite()) {
            return Err(Error::Domain(format!("weibull shape must be > 0, got {}", self.shape)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Domain(format!("weibull scale must be > 0, got {}", self.scale)));
        }
        Ok(())
    }

    /// Rayleigh special case (k = 2) parameterised by the mean wind speed:
    /// c = 2·v̄/√π.
    pub fn from_mean_rayleigh(mean_speed: f64) -> Result<Self> {
        if !(mean_speed > 0.0 && mean_speed.is_finite()) {
            return Err(Error::Domain(format!("mean wind speed must be > 0, got {mean_speed}")));
        }
        Ok(WeibullParams {
            shape: 2.0,
            scale: 2.0 * mean_speed / std::f64::consts::PI.sqrt(),
        })
    }

    /// Empirical moment fit: k = (std/mean)^-1.086, c = mean / Γ(1 + 1/k).
    pub fn fit_moments(mean: f64, std: f64) -> Result<(Self, Option<FitWarning>)> {
        if !(mean > 0.0 && mean.is_finite()) || !(std > 0.0 && std.is_finite()) {
            return Err(Error::Domain(format!(
                "weibull moment fit needs mean > 0 and std > 0, got mean {mean}, std {std}"
            )));
        }
        let ratio = std / mean;
        let shape = ratio.powf(SHAPE_EXPONENT);
        let scale = mean / gamma(1.0 + 1.0 / shape);
        let p = WeibullParams::new(shape, scale)?;
        let warning = (ratio >= 5.0).then_some(FitWarning::ExtremeDispersion { ratio, shape });
        Ok((p, warning))
    }

    pub fn pdf(&self, v: f64) -> f64 {
        if v < 0.0 {
            return 0.0;
        }
        let z = v / self.scale;
        (self.shape / self.scale) * z.powf(self.shape - 1.0) * (-z.powf(self.shape)).exp()
    }

    pub fn ln_pdf(&self, v: f64) -> f64 {
        if v < 0.0 {
            return f64::NEG_INFINITY;
        }
        let z = v / self.scale;
        (self.shape / self.scale).ln() + (self.shape - 1.0) * z.ln() - z.powf(self.shape)
    }

    pub fn cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        -(-(v / self.scale).powf(self.shape)).exp_m1()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.scale * (-(-p).ln_1p()).powf(1.0 / self.shape)
    }

    pub fn mean(&self) -> f64 {
        self.scale * gamma(1.0 + 1.0 / self.shape)
    }

    pub fn std_dev(&self) -> f64 {
        let g1 = gamma(1.0 + 1.0 / self.shape);
        let g2 = gamma(1.0 + 2.0 / self.shape);
        self.scale * (g2 - g1 * g1).max(0.0).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::integrate;
    use std::f64::consts::PI;

    #[test]
    fn density_vanishes_at_origin_for_shape_above_one() {
        let p = WeibullParams::new(2.0, 5.0).unwrap();
        assert_eq!(p.pdf(0.0), 0.0);
    }

    #[test]
    fn exponential_case_at_scale() {
        let p = WeibullParams::new(1.0, 1.0).unwrap();
        assert!((p.pdf(1.0) - (-1f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn density_normalises() {
        let p = WeibullParams::new(2.3, 7.0).unwrap();
        let total = integrate(&|v| p.pdf(v), 0.0, 100.0, 1e-12);
        assert!((total - 1.0).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(WeibullParams::new(0.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(WeibullParams::new(1.0, -1.0), Err(Error::Domain(_))));
        assert!(matches!(WeibullParams::from_mean_rayleigh(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn cdf_edges_and_rayleigh_median_point() {
        let vw = 6.0;
        let p = WeibullParams::from_mean_rayleigh(vw).unwrap();
        assert_eq!(p.cdf(0.0), 0.0);
        assert!((p.cdf(vw) - (1.0 - (-PI / 4.0).exp())).abs() < 1e-15);
        assert!((p.cdf(vw) - 0.5440).abs() < 1e-4);
        assert_eq!(p.cdf(1e6), 1.0);
    }

    #[test]
    fn rayleigh_scale() {
        let p = WeibullParams::from_mean_rayleigh(PI.sqrt() / 2.0).unwrap();
        assert_eq!(p.shape, 2.0);
        assert!((p.scale - 1.0).abs() < 1e-15);
        let p = WeibullParams::from_mean_rayleigh(5.0).unwrap();
        assert!((p.scale - 5.6419).abs() < 1e-4);
        let mean = integrate(&|v| v * p.pdf(v), 0.0, 200.0, 1e-12);
        assert!((mean - 5.0).abs() < 1e-6);
    }

    #[test]
    fn moment_fit_values() {
        let (p, w) = WeibullParams::fit_moments(3.0, 3.0).unwrap();
        assert!(w.is_none());
        assert!((p.shape - 1.0).abs() < 1e-15);
        let (p, _) = WeibullParams::fit_moments(5.0, 2.5).unwrap();
        // 2^1.086 and 5 / Γ(1 + 1/k), evaluated independently
        assert!((p.shape - 2.122_846_417_899_589).abs() < 1e-12);
        assert!((p.scale - 5.645_627_035_180_377).abs() < 1e-9);
    }

    #[test]
    fn moment_fit_warns_on_extreme_dispersion() {
        let (_, w) = WeibullParams::fit_moments(1.0, 6.0).unwrap();
        assert!(matches!(w, Some(FitWarning::ExtremeDispersion { .. })));
    }

    // The empirical shape formula reproduces the mean exactly (the scale is
    // solved from it) but the std only to about 1.5 %.
    #[test]
    fn moment_fit_round_trip() {
        for i in 0..=40 {
            let truth = WeibullParams::new(1.2 + 0.07 * i as f64, 6.0).unwrap();
            let (fit, _) = WeibullParams::fit_moments(truth.mean(), truth.std_dev()).unwrap();
            assert!((fit.mean() / truth.mean() - 1.0).abs() < 1e-3, "{truth:?}");
            assert!((fit.std_dev() / truth.std_dev() - 1.0).abs() < 0.015, "{truth:?} -> {fit:?}");
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let p = WeibullParams::new(2.0, 1.0).unwrap();
        assert!((p.quantile(1.0 - (-1f64).exp()) - 1.0).abs() < 1e-14);
    }
}
