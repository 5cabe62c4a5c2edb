use serde::{Deserialize, Serialize};

use crate::engine::{Scenario, ScenarioSet};
use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Which part of the profile the distance looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceMode {
    /// Wind and PV series concatenated.
    #[default]
    Joint,
    Wind,
    Pv,
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn distance_unchecked(a: &Scenario, b: &Scenario, mode: DistanceMode) -> f64 {
    match mode {
        DistanceMode::Joint => l1(&a.wind_kw, &b.wind_kw) + l1(&a.pv_kw, &b.pv_kw),
        DistanceMode::Wind => l1(&a.wind_kw, &b.wind_kw),
        DistanceMode::Pv => l1(&a.pv_kw, &b.pv_kw),
    }
}

fn check_shape(s: &Scenario, horizon: usize) -> Result<()> {
    if s.wind_kw.len() != horizon || s.pv_kw.len() != horizon {
        return Err(Error::Dimension(format!(
            "scenario {} has series of length {}/{}, expected {horizon}",
            s.id,
            s.wind_kw.len(),
            s.pv_kw.len()
        )));
    }
    Ok(())
}

/// Sum of absolute hourly differences over the concatenated wind‖PV profile.
pub fn distance(a: &Scenario, b: &Scenario) -> Result<f64> {
    check_shape(a, a.horizon())?;
    check_shape(b, a.horizon())?;
    Ok(distance_unchecked(a, b, DistanceMode::Joint))
}

/// Row-major m×m matrix of pairwise distances.
pub fn distance_matrix(scenarios: &[Scenario], mode: DistanceMode) -> Result<Vec<f64>> {
    let m = scenarios.len();
    if let Some(first) = scenarios.first() {
        for s in scenarios {
            check_shape(s, first.horizon())?;
        }
    }
    let row = |i: usize| -> Vec<f64> {
        (0..m).map(|j| distance_unchecked(&scenarios[i], &scenarios[j], mode)).collect()
    };
    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = (0..m).into_par_iter().map(row).collect();
    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..m).map(row).collect();
    Ok(rows.concat())
}

/// Average distance from scenario `i` to every member of the set, itself
/// included (its zero term still counts in the 1/m).
pub fn mean_distance(i: usize, scenarios: &[Scenario]) -> Result<f64> {
    let m = scenarios.len();
    if m < 2 || i >= m {
        return Err(Error::Domain(format!("mean distance needs m ≥ 2 and i < m (m = {m}, i = {i})")));
    }
    let mut sum = 0.0;
    for s in scenarios {
        sum += distance(&scenarios[i], s)?;
    }
    Ok(sum / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MergeStep {
    pub representative: usize,
    pub merged: usize,
    pub distance: f64,
    /// Total weight left after this merge.
    pub total_weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reduction {
    pub set: ScenarioSet,
    /// Scenario ids per merge, in order.
    pub trace: Vec<MergeStep>,
}

/// Greedy backward reduction.
///
/// Each round picks the scenario with the smallest mean distance, moves the
/// weight of its nearest neighbour onto it and drops the neighbour. Profiles
/// are never averaged. Ties go to the earlier scenario in the input order.
pub fn reduce(set: &ScenarioSet, target: usize, mode: DistanceMode) -> Result<Reduction> {
    let m = set.len();
    if target < 1 || target > m {
        return Err(Error::Domain(format!("target count must be in [1, {m}], got {target}")));
    }
    let d = distance_matrix(&set.scenarios, mode)?;
    let mut weights: Vec<f64> = set.scenarios.iter().map(|s| s.weight).collect();
    let mut alive = vec![true; m];
    let mut row_sum: Vec<f64> = (0..m).map(|i| d[i * m..(i + 1) * m].iter().sum()).collect();
    let mut trace = Vec::with_capacity(m - target);

    for _ in target..m {
        let best = (0..m).filter(|&i| alive[i]).map(|i| row_sum[i]).fold(f64::INFINITY, f64::min);
        // Running sums drift by rounding, so near-ties are settled on sums
        // recomputed over the survivors.
        let slack = 1e-9 * best.max(1.0);
        let mut rep = usize::MAX;
        let near_ties: Vec<usize> = (0..m).filter(|&i| alive[i] && row_sum[i] <= best + slack).collect();
        for i in near_ties {
            row_sum[i] = (0..m).filter(|&j| alive[j]).map(|j| d[i * m + j]).sum();
            if rep == usize::MAX || row_sum[i] < row_sum[rep] {
                rep = i;
            }
        }
        let mut near = usize::MAX;
        for j in (0..m).filter(|&j| alive[j] && j != rep) {
            if near == usize::MAX || d[rep * m + j] < d[rep * m + near] {
                near = j;
            }
        }
        weights[rep] += weights[near];
        weights[near] = 0.0;
        alive[near] = false;
        for i in (0..m).filter(|&i| alive[i]) {
            row_sum[i] -= d[i * m + near];
        }
        trace.push(MergeStep {
            representative: set.scenarios[rep].id,
            merged: set.scenarios[near].id,
            distance: d[rep * m + near],
            total_weight: weights.iter().sum(),
        });
    }

    let scenarios = set
        .scenarios
        .iter()
        .zip(&weights)
        .zip(&alive)
        .filter(|(_, &a)| a)
        .map(|((s, &w), _)| Scenario { weight: w, ..s.clone() })
        .collect();
    Ok(Reduction {
        set: ScenarioSet { scenarios, metadata: set.metadata.clone() },
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{SetMetadata, WeatherTag};
    use proptest::prelude::*;

    fn flat(id: usize, wind: f64, pv: f64, t: usize, weight: f64) -> Scenario {
        Scenario { id, wind_kw: vec![wind; t], pv_kw: vec![pv; t], weight, tag: WeatherTag::Normal }
    }

    fn set_of(scenarios: Vec<Scenario>) -> ScenarioSet {
        let horizon = scenarios[0].horizon();
        let n = scenarios.len();
        ScenarioSet {
            scenarios,
            metadata: SetMetadata { seed: 0, n_generated: n, horizon, hourly_inputs: vec![], flags: vec![] },
        }
    }

    #[test]
    fn constant_profiles() {
        let a = flat(0, 5.0, 0.0, 24, 0.5);
        let b = flat(1, 3.0, 0.0, 24, 0.5);
        assert_eq!(distance(&a, &a).unwrap(), 0.0);
        assert_eq!(distance(&a, &b).unwrap(), 48.0);
        let s = [a, b];
        assert_eq!(mean_distance(0, &s).unwrap(), 24.0);
        assert_eq!(mean_distance(1, &s).unwrap(), 24.0);
    }

    #[test]
    fn horizon_mismatch() {
        let a = flat(0, 1.0, 1.0, 24, 1.0);
        let b = flat(1, 1.0, 1.0, 23, 1.0);
        assert!(matches!(distance(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn identical_pair_collapses() {
        let set = set_of(vec![flat(0, 7.0, 2.0, 24, 0.5), flat(1, 7.0, 2.0, 24, 0.5)]);
        let r = reduce(&set, 1, DistanceMode::Joint).unwrap();
        assert_eq!(r.set.len(), 1);
        assert_eq!(r.set.scenarios[0].id, 0);
        assert_eq!(r.set.scenarios[0].weight, 1.0);
        assert!(reduce(&set, 0, DistanceMode::Joint).is_err());
        assert!(reduce(&set, 3, DistanceMode::Joint).is_err());
    }

    #[test]
    fn modes_look_at_their_own_series() {
        let a = flat(0, 10.0, 0.0, 4, 0.5);
        let b = flat(1, 0.0, 10.0, 4, 0.5);
        let d = |m| distance_matrix(&[a.clone(), b.clone()], m).unwrap()[1];
        assert_eq!(d(DistanceMode::Joint), 80.0);
        assert_eq!(d(DistanceMode::Wind), 40.0);
        assert_eq!(d(DistanceMode::Pv), 40.0);
    }

    fn random_set() -> impl Strategy<Value = ScenarioSet> {
        (2usize..9, 1usize..6).prop_flat_map(|(m, t)| {
            proptest::collection::vec(proptest::collection::vec(0.0f64..2000.0, 2 * t), m).prop_map(move |rows| {
                let w = 1.0 / rows.len() as f64;
                set_of(
                    rows.into_iter()
                        .enumerate()
                        .map(|(id, r)| Scenario {
                            id,
                            wind_kw: r[..t].to_vec(),
                            pv_kw: r[t..].to_vec(),
                            weight: w,
                            tag: WeatherTag::Normal,
                        })
                        .collect(),
                )
            })
        })
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(s in random_set()) {
            let v = &s.scenarios;
            for a in v { for b in v {
                let dab = distance(a, b).unwrap();
                prop_assert!(dab >= 0.0);
                prop_assert_eq!(dab, distance(b, a).unwrap());
                prop_assert_eq!(dab == 0.0, a.wind_kw == b.wind_kw && a.pv_kw == b.pv_kw);
                for c in v {
                    prop_assert!(dab <= distance(a, c).unwrap() + distance(c, b).unwrap() + 1e-9);
                }
            }}
        }

        #[test]
        fn mean_distance_is_homogeneous(s in random_set()) {
            let doubled: Vec<Scenario> = s.scenarios.iter().map(|x| Scenario {
                wind_kw: x.wind_kw.iter().map(|v| 2.0 * v).collect(),
                pv_kw: x.pv_kw.iter().map(|v| 2.0 * v).collect(),
                ..x.clone()
            }).collect();
            for i in 0..s.len() {
                let y = mean_distance(i, &s.scenarios).unwrap();
                let y2 = mean_distance(i, &doubled).unwrap();
                prop_assert!((y2 - 2.0 * y).abs() <= 1e-9 * y.max(1.0));
            }
        }

        #[test]
        fn reduction_conserves_weight_and_profiles(s in random_set(), k in 1usize..9) {
            let target = k.min(s.len());
            let r = reduce(&s, target, DistanceMode::Joint).unwrap();
            prop_assert_eq!(r.set.len(), target);
            prop_assert_eq!(r.trace.len(), s.len() - target);
            for step in &r.trace {
                prop_assert!((step.total_weight - 1.0).abs() <= 1e-12);
            }
            for kept in &r.set.scenarios {
                let orig = &s.scenarios[kept.id];
                prop_assert_eq!(&kept.wind_kw, &orig.wind_kw);
                prop_assert_eq!(&kept.pv_kw, &orig.pv_kw);
            }
        }
    }
}
