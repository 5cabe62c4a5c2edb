//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a flat `Float64Array`; layouts are documented per
//! function. The `*_impl` functions hold the logic so it can be tested
//! natively.

use statrs::distribution::{ContinuousCDF, Normal};
use wasm_bindgen::prelude::*;

use wxscen::copula::FrankCopula;
use wxscen::marginal::MarginalModel;
use wxscen::pipeline::synthetic::{reference_precip, reference_wind};
use wxscen::power::{PvSpec, TurbineSpec};
use wxscen::rng::{open_unit, stream};
use wxscen::tree::{build_tree, LevelBounds};
use wxscen::ut::{propagate_power, InputMoments, DEFAULT_W0};

fn js(e: wxscen::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// `points` samples of both power curves: `[v.., wind_kw.., s.., pv_kw..]`,
/// wind speed over [0, 30] m/s and irradiance over [0, 1.2] kW/m².
#[wasm_bindgen]
pub fn power_curves(points: usize) -> Vec<f64> {
    let (turbine, pv) = (TurbineSpec::default(), PvSpec::default());
    let n = points.max(2);
    let v: Vec<f64> = (0..n).map(|i| 30.0 * i as f64 / (n - 1) as f64).collect();
    let s: Vec<f64> = (0..n).map(|i| 1.2 * i as f64 / (n - 1) as f64).collect();
    let mut out = v.clone();
    out.extend(v.iter().map(|&x| turbine.power(x)));
    out.extend(&s);
    out.extend(s.iter().map(|&x| pv.power(x)));
    out
}

pub fn power_ut_impl(
    wind_mean: f64,
    wind_std: f64,
    ghi_mean: f64,
    ghi_std: f64,
    draws: usize,
    seed: u64,
) -> wxscen::Result<Vec<f64>> {
    let (turbine, pv) = (TurbineSpec::default(), PvSpec::default());
    let m = InputMoments::diagonal(vec![wind_mean, ghi_mean], &[wind_std, ghi_std]);
    let ut = propagate_power(&m, &turbine, &pv, DEFAULT_W0)?;
    let sd = ut.std_dev();

    let z = Normal::standard();
    let mut rng = stream(seed, 0);
    let (mut sum, mut sq) = ([0.0; 2], [0.0; 2]);
    for _ in 0..draws {
        let v = wind_mean + wind_std * z.inverse_cdf(open_unit(&mut rng));
        let s = ghi_mean + ghi_std * z.inverse_cdf(open_unit(&mut rng));
        for (k, p) in [turbine.power(v), pv.power(s)].into_iter().enumerate() {
            sum[k] += p;
            sq[k] += p * p;
        }
    }
    let n = draws.max(1) as f64;
    let mc = |k: usize| {
        let mean = sum[k] / n;
        (mean, (sq[k] / n - mean * mean).max(0.0).sqrt())
    };
    let ((mw, sw), (mp, sp)) = (mc(0), mc(1));
    Ok(vec![ut.mean[0], sd[0], ut.mean[1], sd[1], mw, sw, mp, sp])
}

/// Power moments from Gaussian inputs: `[ut_wind_mean, ut_wind_sd,
/// ut_pv_mean, ut_pv_sd, mc_wind_mean, mc_wind_sd, mc_pv_mean, mc_pv_sd]`.
#[wasm_bindgen]
pub fn power_ut(
    wind_mean: f64,
    wind_std: f64,
    ghi_mean: f64,
    ghi_std: f64,
    draws: usize,
    seed: u64,
) -> Result<Vec<f64>, JsError> {
    power_ut_impl(wind_mean, wind_std, ghi_mean, ghi_std, draws, seed).map_err(js)
}

pub fn frank_density_impl(theta: f64, grid: usize) -> wxscen::Result<Vec<f64>> {
    let c = FrankCopula::new(theta)?;
    let h = 1.0 / grid as f64;
    let mut out = Vec::with_capacity(grid * grid);
    for j in 0..grid {
        for i in 0..grid {
            out.push(c.pdf((i as f64 + 0.5) * h, (j as f64 + 0.5) * h));
        }
    }
    Ok(out)
}

/// Copula density at cell centres of a `grid`×`grid` lattice, row j holds v.
#[wasm_bindgen]
pub fn frank_density(theta: f64, grid: usize) -> Result<Vec<f64>, JsError> {
    frank_density_impl(theta, grid).map_err(js)
}

pub fn frank_samples_impl(theta: f64, n: usize, seed: u64) -> wxscen::Result<Vec<f64>> {
    let c = FrankCopula::new(theta)?;
    let mut rng = stream(seed, 1);
    Ok((0..n).flat_map(|_| {
        let (u, v) = c.sample_uv(&mut rng);
        [u, v]
    })
    .collect())
}

/// `n` copula draws interleaved as `[u0, v0, u1, v1, ..]`.
#[wasm_bindgen]
pub fn frank_samples(theta: f64, n: usize, seed: u64) -> Result<Vec<f64>, JsError> {
    frank_samples_impl(theta, n, seed).map_err(js)
}

#[wasm_bindgen]
pub fn kendall_tau(theta: f64) -> Result<f64, JsError> {
    Ok(FrankCopula::new(theta).map_err(js)?.kendall_tau())
}

pub fn tree_probabilities_impl(theta: f64) -> wxscen::Result<Vec<f64>> {
    let tree = build_tree(
        &FrankCopula::new(theta)?,
        &MarginalModel::Gev(reference_wind()),
        &MarginalModel::GevGpSplice(reference_precip()),
        &LevelBounds::default(),
    )?;
    Ok(tree.cells.iter().map(|c| c.probability).collect())
}

/// The 16 cell probabilities in scenario-id order under the reference
/// wind and precipitation marginals.
#[wasm_bindgen]
pub fn tree_probabilities(theta: f64) -> Result<Vec<f64>, JsError> {
    tree_probabilities_impl(theta).map_err(js)
}
