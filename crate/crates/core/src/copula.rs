//! Frank copula for the wind-speed / precipitation dependence.
//!
//! ```text
//! C(u,v) = -(1/θ)·ln[1 + (e^{-θu}-1)(e^{-θv}-1)/(e^{-θ}-1)]
//! c(u,v) = -θ(e^{-θ}-1)e^{-θ(u+v)} / [(e^{-θ}-1) + (e^{-θu}-1)(e^{-θv}-1)]²
//! ```
//! θ > 0 gives positive and θ < 0 negative dependence; |θ| below
//! [`INDEPENDENCE_EPS`] is evaluated as the independence copula and |θ| is
//! clamped to [`THETA_MAX`] so the exponentials stay finite.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::marginal::MarginalModel;
use crate::numeric::{bisect_increasing, golden_min, integrate};
use crate::rng::open_unit;

pub const THETA_MAX: f64 = 50.0;
pub const INDEPENDENCE_EPS: f64 = 1e-8;
/// |τ| below this is reported as independence.
pub const TAU_INDEPENDENCE: f64 = 1e-3;
pub const MIN_PAIRS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrankCopula {
    pub theta: f64,
}

impl FrankCopula {
    pub fn new(theta: f64) -> Result<Self> {
        if !theta.is_finite() {
            return Err(Error::Domain(format!("frank theta must be finite, got {theta}")));
        }
        Ok(FrankCopula {
            theta: theta.clamp(-THETA_MAX, THETA_MAX),
        })
    }

    pub fn independence() -> Self {
        FrankCopula { theta: 0.0 }
    }

    fn is_independent(&self) -> bool {
        self.theta.abs() < INDEPENDENCE_EPS
    }

    pub fn cdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.clamp(0.0, 1.0), v.clamp(0.0, 1.0));
        let c = if self.is_independent() {
            u * v
        } else if self.theta > 0.0 {
            cdf_pos(self.theta, u, v)
        } else {
            // C_{-θ}(u, v) = u - C_θ(u, 1 - v)
            u - cdf_pos(-self.theta, u, 1.0 - v)
        };
        // Fréchet–Hoeffding bounds
        let upper = u.min(v);
        c.clamp((u + v - 1.0).clamp(0.0, upper), upper)
    }

    pub fn ln_pdf(&self, u: f64, v: f64) -> f64 {
        if !(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0) {
            return f64::NEG_INFINITY;
        }
        if self.is_independent() {
            0.0
        } else if self.theta > 0.0 {
            ln_pdf_pos(self.theta, u, v)
        } else {
            ln_pdf_pos(-self.theta, u, 1.0 - v)
        }
    }

    pub fn pdf(&self, u: f64, v: f64) -> f64 {
        self.ln_pdf(u, v).exp()
    }

    /// Conditional distribution ∂C/∂u = P(V ≤ v | U = u).
    pub fn conditional_cdf(&self, v: f64, u: f64) -> f64 {
        let v = v.clamp(0.0, 1.0);
        if self.is_independent() {
            v
        } else if self.theta > 0.0 {
            conditional_cdf_pos(self.theta, v, u)
        } else {
            1.0 - conditional_cdf_pos(-self.theta, 1.0 - v, u)
        }
    }

    /// Inverse of [`conditional_cdf`](Self::conditional_cdf) in `v`.
    pub fn conditional_quantile(&self, w: f64, u: f64) -> f64 {
        if self.is_independent() {
            w
        } else if self.theta > 0.0 {
            conditional_quantile_pos(self.theta, w, u)
        } else {
            1.0 - conditional_quantile_pos(-self.theta, 1.0 - w, u)
        }
    }

    /// C-measure of [u1,u2]×[v1,v2].
    pub fn rectangle_probability(&self, u1: f64, u2: f64, v1: f64, v2: f64) -> f64 {
        self.cdf(u2, v2) - self.cdf(u1, v2) - self.cdf(u2, v1) + self.cdf(u1, v1)
    }

    /// Draw (u, v) by conditional inversion.
    pub fn sample_uv<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let u = open_unit(rng);
        let w = open_unit(rng);
        (u, self.conditional_quantile(w, u))
    }

    pub fn kendall_tau(&self) -> f64 {
        kendall_tau_of_theta(self.theta)
    }

    /// Finite-level tail-dependence coefficients (upper, lower) at level q.
    /// Both tend to 0 as q → 1 for every Frank θ.
    pub fn tail_dependence_at(&self, q: f64) -> (f64, f64) {
        let upper = (1.0 - 2.0 * q + self.cdf(q, q)) / (1.0 - q);
        let lower = self.cdf(1.0 - q, 1.0 - q) / (1.0 - q);
        (upper, lower)
    }
}

// Positive-θ kernels. Negative θ is handled by the reflection
// C_{-θ}(u, v) = u - C_θ(u, 1 - v).
//
// With a = e^{-θu}, b = e^{-θv}, the recurring denominator
// (1 - e^{-θ}) - (1 - a)(1 - b) is evaluated as the sum of two nonnegative
// terms a(1 - e^{-θ(1-u)}) + b(1 - a).

fn denom_pos(t: f64, u: f64, v: f64) -> f64 {
    let a = (-t * u).exp();
    let b = (-t * v).exp();
    -a * (-t * (1.0 - u)).exp_m1() - b * (-t * u).exp_m1()
}

fn cdf_pos(t: f64, u: f64, v: f64) -> f64 {
    if t < 1.0 {
        let num = (-t * u).exp_m1() * (-t * v).exp_m1();
        -(num / (-t).exp_m1()).ln_1p() / t
    } else {
        -(denom_pos(t, u, v).ln() - (-(-t).exp_m1()).ln()) / t
    }
}

fn ln_pdf_pos(t: f64, u: f64, v: f64) -> f64 {
    t.ln() + (-(-t).exp_m1()).ln() - t * (u + v) - 2.0 * denom_pos(t, u, v).ln()
}

fn conditional_cdf_pos(t: f64, v: f64, u: f64) -> f64 {
    let a = (-t * u).exp();
    (a * -(-t * v).exp_m1() / denom_pos(t, u, v)).clamp(0.0, 1.0)
}

fn log_add_exp(x: f64, y: f64) -> f64 {
    let m = x.max(y);
    if m == f64::NEG_INFINITY {
        m
    } else {
        m + ((x - m).exp() + (y - m).exp()).ln()
    }
}

fn conditional_quantile_pos(t: f64, w: f64, u: f64) -> f64 {
    let v = if t < 1.0 {
        let a = (-t * u).exp();
        -(w * (-t).exp_m1() / (w + (1.0 - w) * a)).ln_1p() / t
    } else {
        // v = -(1/θ)·ln[(w e^{-θ} + (1-w)a) / (w + (1-w)a)]
        let (lw, l1w) = (w.ln(), (-w).ln_1p());
        -(log_add_exp(lw - t, l1w - t * u) - log_add_exp(lw, l1w - t * u)) / t
    };
    v.clamp(0.0, 1.0)
}

/// t/(e^t − 1), continuous at 0.
fn debye_integrand(t: f64) -> f64 {
    if t.abs() < 1e-10 {
        1.0 - 0.5 * t
    } else {
        t / t.exp_m1()
    }
}

/// First Debye function D₁(x) = (1/x)∫₀ˣ t/(eᵗ−1) dt.
pub fn debye1(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        return 1.0 - x / 4.0;
    }
    integrate(&debye_integrand, 0.0, x, 1e-15) / x
}

/// Kendall's τ of the Frank copula: 1 − (4/θ)(1 − D₁(θ)).
pub fn kendall_tau_of_theta(theta: f64) -> f64 {
    if theta.abs() < 1e-3 {
        // series: θ/9 − θ³/900
        return theta / 9.0 - theta.powi(3) / 900.0;
    }
    1.0 - 4.0 / theta * (1.0 - debye1(theta))
}

/// Invert τ(θ); saturates at ±[`THETA_MAX`].
pub fn theta_from_tau(tau: f64) -> f64 {
    let hi = kendall_tau_of_theta(THETA_MAX);
    if tau >= hi {
        return THETA_MAX;
    }
    if tau <= -hi {
        return -THETA_MAX;
    }
    bisect_increasing(kendall_tau_of_theta, tau, -THETA_MAX, THETA_MAX)
}

/// Kendall's τ-b in O(n log n) (Knight's algorithm).
pub fn empirical_kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len());
    if n < 2 {
        return 0.0;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]).then(y[a].total_cmp(&y[b])));

    let pairs = |run: u64| run * run.saturating_sub(1) / 2;
    let (mut tied_x, mut tied_xy) = (0u64, 0u64);
    let (mut run_x, mut run_xy) = (1u64, 1u64);
    for k in 1..n {
        let (a, b) = (idx[k - 1], idx[k]);
        if x[a] == x[b] {
            run_x += 1;
            if y[a] == y[b] {
                run_xy += 1;
            } else {
                tied_xy += pairs(run_xy);
                run_xy = 1;
            }
        } else {
            tied_x += pairs(run_x);
            tied_xy += pairs(run_xy);
            run_x = 1;
            run_xy = 1;
        }
    }
    tied_x += pairs(run_x);
    tied_xy += pairs(run_xy);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = ys.clone();
    let swaps = merge_count(&mut ys, &mut buf);

    let mut tied_y = 0u64;
    let mut run = 1u64;
    for k in 1..n {
        if ys[k] == ys[k - 1] {
            run += 1;
        } else {
            tied_y += pairs(run);
            run = 1;
        }
    }
    tied_y += pairs(run);

    let total = pairs(n as u64);
    let num = total as f64 - tied_x as f64 - tied_y as f64 + tied_xy as f64 - 2.0 * swaps as f64;
    let den = ((total - tied_x) as f64 * (total - tied_y) as f64).sqrt();
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Merge sort counting strict inversions.
fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = {
        let (l, r) = v.split_at_mut(mid);
        let (bl, br) = buf.split_at_mut(mid);
        merge_count(l, bl) + merge_count(r, br)
    };
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if v[j] < v[i] {
            buf[k] = v[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = v[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&v[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&v[j..n]);
    v.copy_from_slice(&buf[..n]);
    swaps
}

/// Rank transform to (0,1): average rank / (n + 1).
pub fn pseudo_observations(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut out = vec![0.0; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && x[idx[end]] == x[idx[start]] {
            end += 1;
        }
        // ranks start+1 ..= end share their average
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &idx[start..end] {
            out[i] = rank / (n as f64 + 1.0);
        }
        start = end;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CopulaFlag {
    /// |τ| too small: the independence copula was returned.
    Independence,
    /// θ hit the ±50 numerical guard.
    Saturated,
}

/// Output of [`fit_theta`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CopulaFit {
    pub theta: f64,
    pub kendall_tau: f64,
    pub loglik: f64,
    pub aic: f64,
    pub n: usize,
    pub flags: Vec<CopulaFlag>,
    /// Model-implied tail dependence at the 0.999 level (Frank: → 0).
    pub tail_dependence_upper: f64,
    pub tail_dependence_lower: f64,
}

impl CopulaFit {
    pub fn copula(&self) -> FrankCopula {
        FrankCopula { theta: self.theta }
    }
}

fn pseudo_loglik(c: &FrankCopula, u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(&a, &b)| c.ln_pdf(a, b)).sum()
}

/// Fit θ to (wind, precipitation) pairs by maximum pseudo-likelihood on rank
/// pseudo-observations, starting from Kendall-τ inversion. Dry hours
/// (precipitation ≤ 0) are dropped first.
pub fn fit_theta(pairs: &[(f64, f64)]) -> Result<CopulaFit> {
    let wet: Vec<(f64, f64)> = pairs
        .iter()
        .copied()
        .filter(|&(w, p)| p > 0.0 && w.is_finite() && p.is_finite())
        .collect();
    let n = wet.len();
    if n < MIN_PAIRS {
        return Err(Error::InsufficientData(format!(
            "copula fit needs ≥ {MIN_PAIRS} wet pairs, got {n}"
        )));
    }
    let x: Vec<f64> = wet.iter().map(|p| p.0).collect();
    let y: Vec<f64> = wet.iter().map(|p| p.1).collect();
    let tau = empirical_kendall_tau(&x, &y);
    let u = pseudo_observations(&x);
    let v = pseudo_observations(&y);

    let mut flags = Vec::new();
    let theta = if tau.abs() < TAU_INDEPENDENCE {
        flags.push(CopulaFlag::Independence);
        0.0
    } else {
        let start = theta_from_tau(tau);
        if start.abs() >= THETA_MAX {
            start
        } else {
            let nll = |t: f64| -pseudo_loglik(&FrankCopula { theta: t }, &u, &v);
            // coarse scan guards against a poor τ start, golden section refines
            let mut best = (start, nll(start));
            let mut t = -THETA_MAX;
            while t <= THETA_MAX {
                let val = nll(t);
                if val < best.1 {
                    best = (t, val);
                }
                t += 0.5;
            }
            let lo = (best.0 - 0.6).max(-THETA_MAX);
            let hi = (best.0 + 0.6).min(THETA_MAX);
            let refined = golden_min(nll, lo, hi, 1e-9);
            if !nll(refined).is_finite() {
                return Err(Error::Estimation("copula pseudo-likelihood is not finite".into()));
            }
            refined
        }
    };
    if theta.abs() >= THETA_MAX {
        flags.push(CopulaFlag::Saturated);
    }
    let copula = FrankCopula::new(theta)?;
    let loglik = pseudo_loglik(&copula, &u, &v);
    if !loglik.is_finite() {
        return Err(Error::Estimation("copula pseudo-likelihood is not finite".into()));
    }
    let (tail_dependence_upper, tail_dependence_lower) = copula.tail_dependence_at(0.999);
    Ok(CopulaFit {
        theta: copula.theta,
        kendall_tau: tau,
        loglik,
        aic: 2.0 - 2.0 * loglik,
        n,
        flags,
        tail_dependence_upper,
        tail_dependence_lower,
    })
}

/// Joint (wind, precipitation) draws: copula sample mapped through the
/// marginal quantiles. `u` drives wind, `v` precipitation.
pub fn sample_joint<R: Rng + ?Sized>(
    copula: &FrankCopula,
    wind: &MarginalModel,
    precip: &MarginalModel,
    rng: &mut R,
    n: usize,
) -> Vec<(f64, f64)> {
    (0..n)
        .map(|_| {
            let (u, v) = copula.sample_uv(rng);
            (wind.quantile_unchecked(u), precip.quantile_unchecked(v))
        })
        .collect()
}
