//! Unscented transform of input mean/covariance through the power map.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::power::{PvSpec, TurbineSpec};

pub const DEFAULT_W0: f64 = 1.0 / 3.0;
const JITTER: f64 = 1e-12;

/// Mean vector and row-major covariance matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputMoments {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputMoments {
    pub mean: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SigmaSet {
    /// 2q+1 points: the mean, then μ + column ω, then μ − column ω.
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl InputMoments {
    /// Independent inputs from per-dimension standard deviations.
    pub fn diagonal(mean: Vec<f64>, std: &[f64]) -> Self {
        let q = mean.len();
        let covariance = (0..q)
            .map(|i| (0..q).map(|j| if i == j { std[i] * std[i] } else { 0.0 }).collect())
            .collect();
        InputMoments { mean, covariance }
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    fn matrix(&self) -> Result<DMatrix<f64>> {
        let q = self.dim();
        if q == 0 {
            return Err(Error::Dimension("input mean is empty".into()));
        }
        if self.covariance.len() != q || self.covariance.iter().any(|r| r.len() != q) {
            return Err(Error::Dimension(format!("covariance must be {q}×{q}")));
        }
        if self.mean.iter().chain(self.covariance.iter().flatten()).any(|x| !x.is_finite()) {
            return Err(Error::Domain("input moments must be finite".into()));
        }
        let m = DMatrix::from_fn(q, q, |i, j| self.covariance[i][j]);
        let scale = m.amax().max(1.0);
        if (&m - m.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Conditioning("covariance is not symmetric".into()));
        }
        Ok(m)
    }
}

impl OutputMoments {
    pub fn std_dev(&self) -> Vec<f64> {
        (0..self.mean.len()).map(|i| self.covariance[i][i].max(0.0).sqrt()).collect()
    }
}

/// Lower-triangular factor of a positive semidefinite matrix. A pivot that
/// vanishes (to rounding) yields a zero column instead of failing, so
/// degenerate directions contribute no spread.
fn semidefinite_cholesky(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    let tol = 1e-13 * a.diagonal().amax().max(f64::MIN_POSITIVE);
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let d = a[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if d < -tol {
            return None;
        }
        if d <= tol {
            for i in j + 1..n {
                let r = a[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
                if r.abs() > tol.sqrt() * a[(i, i)].abs().sqrt().max(tol.sqrt()) {
                    return None;
                }
            }
            continue;
        }
        let djj = d.sqrt();
        l[(j, j)] = djj;
        for i in j + 1..n {
            let r = a[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = r / djj;
        }
    }
    Some(l)
}

/// 2q+1 symmetric sigma points. The spread matrix is the lower-triangular
/// factor of q/(1−W0)·Σ; if Σ fails to factor, 1e-12·I is added once.
pub fn sigma_points(m: &InputMoments, w0: f64) -> Result<SigmaSet> {
    if !(0.0..1.0).contains(&w0) {
        return Err(Error::Domain(format!("W0 must be in [0, 1), got {w0}")));
    }
    let cov = m.matrix()?;
    let q = m.dim();
    let scaled = cov * (q as f64 / (1.0 - w0));
    let l = match semidefinite_cholesky(&scaled) {
        Some(l) => l,
        None => semidefinite_cholesky(&(&scaled + DMatrix::identity(q, q) * JITTER))
            .ok_or_else(|| Error::Conditioning("factorization failed even after 1e-12 jitter".into()))?,
    };
    let mu = DVector::from_column_slice(&m.mean);
    let mut points = Vec::with_capacity(2 * q + 1);
    points.push(m.mean.clone());
    for sign in [1.0, -1.0] {
        for w in 0..q {
            points.push((&mu + l.column(w) * sign).iter().copied().collect());
        }
    }
    let mut weights = vec![(1.0 - w0) / (2 * q) as f64; 2 * q + 1];
    weights[0] = w0;
    Ok(SigmaSet { points, weights })
}

/// Push the sigma points through `f` and recombine the weighted mean and
/// outer-product covariance.
pub fn propagate<F>(m: &InputMoments, f: F, w0: f64) -> Result<OutputMoments>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let set = sigma_points(m, w0)?;
    let mut ys: Vec<DVector<f64>> = Vec::with_capacity(set.points.len());
    for (index, x) in set.points.iter().enumerate() {
        let y = f(x).map_err(|e| Error::Propagation { index, reason: e.to_string() })?;
        if let Some(first) = ys.first() {
            if y.len() != first.len() {
                return Err(Error::Propagation { index, reason: "output dimension changed".into() });
            }
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(Error::Propagation { index, reason: format!("non-finite output {y:?}") });
        }
        ys.push(DVector::from_vec(y));
    }
    let r = ys[0].len();
    let mut mean = DVector::<f64>::zeros(r);
    for (y, w) in ys.iter().zip(&set.weights) {
        mean += y * *w;
    }
    let mut cov = DMatrix::<f64>::zeros(r, r);
    for (y, w) in ys.iter().zip(&set.weights) {
        let d = y - &mean;
        cov += &d * d.transpose() * *w;
    }
    cov = (&cov + cov.transpose()) * 0.5;
    Ok(OutputMoments {
        mean: mean.iter().copied().collect(),
        covariance: (0..r).map(|i| (0..r).map(|j| cov[(i, j)]).collect()).collect(),
    })
}

/// (wind m/s, irradiance kW/m²) moments → (wind kW, PV kW) moments.
pub fn propagate_power(m: &InputMoments, turbine: &TurbineSpec, pv: &PvSpec, w0: f64) -> Result<OutputMoments> {
    if m.dim() != 2 {
        return Err(Error::Dimension(format!("power propagation takes 2 inputs, got {}", m.dim())));
    }
    turbine.validate()?;
    pv.validate()?;
    propagate(m, |x| Ok(vec![turbine.power(x[0]), pv.power(x[1])]), w0)
}
