//! Inverse problem: search the Fourier coefficients of G(psi) for the
//! profile maximizing the stop-band attenuation nu or the characteristic
//! exponent mu = nu/chi, under per-coefficient bounds.
//!
//! Derivative-free bounded Nelder–Mead with deterministic seeded restarts;
//! objective evaluations are memoized on the coefficient vector rounded to
//! 1e-12.

use std::collections::HashMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::PhaseProfile;
use crate::real::Real;
use crate::realband::{stopband_metrics, BandMetrics};

/// What to maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Attenuation per period nu.
    MaximizeNu,
    /// Characteristic exponent mu = nu / chi.
    MaximizeMu,
}

/// Search specification. The design vector is
/// `[a_2 .. a_{2 m_max}, b_2 .. b_{2 m_max}]` with one [lo, hi] interval per
/// coefficient (2 m_max entries); a0 is excluded (it rescales chi without
/// bound) and q0 is fixed to 1.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DesignSpec<T> {
    pub m_max: usize,
    pub bounds: Vec<(T, T)>,
    pub objective: Objective,
    pub max_evals: usize,
    pub seed: u64,
}

impl<T: Real> DesignSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if self.m_max < 1 {
            return Err(Error::invalid("DesignSpec", "m_max must be >= 1"));
        }
        if self.bounds.len() != 2 * self.m_max {
            return Err(Error::invalid(
                "DesignSpec",
                format!(
                    "need {} bound intervals (a then b coefficients), got {}",
                    2 * self.m_max,
                    self.bounds.len()
                ),
            ));
        }
        if self.max_evals < 1 {
            return Err(Error::invalid("DesignSpec", "max_evals must be >= 1"));
        }
        for &(lo, hi) in &self.bounds {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(Error::invalid("DesignSpec", "bounds must be finite with lo <= hi"));
            }
        }
        Ok(())
    }
}

/// One accepted improvement: evaluation count when found, coefficients,
/// objective value.
#[derive(Debug, Clone)]
pub struct HistoryEntry<T> {
    pub eval: usize,
    pub coeffs: Vec<T>,
    pub objective: T,
}

/// Optimization outcome.
#[derive(Debug)]
pub struct DesignResult<T: Real> {
    pub best: PhaseProfile<T>,
    pub metrics: BandMetrics<T>,
    pub history: Vec<HistoryEntry<T>>,
    pub coeffs: Vec<T>,
    pub objective_value: T,
    pub evaluations: usize,
    /// True when the evaluation budget ran out before the restart schedule
    /// finished; the best found so far is still returned.
    pub budget_exhausted: bool,
}

pub(crate) fn profile_from_coeffs<T: Real>(coeffs: &[T], m_max: usize) -> PhaseProfile<T> {
    let a = coeffs[..m_max].to_vec();
    let b = coeffs[m_max..].to_vec();
    PhaseProfile::new(T::one(), T::zero(), a, b).expect("q0 = 1 is valid")
}

/// Objective value for a coefficient vector.
pub fn evaluate_objective<T: Real>(
    coeffs: &[T],
    m_max: usize,
    objective: Objective,
) -> Result<T> {
    let profile = profile_from_coeffs(coeffs, m_max);
    let metrics = stopband_metrics(&profile, T::of(1e-10))?;
    Ok(match objective {
        Objective::MaximizeNu => metrics.nu,
        Objective::MaximizeMu => metrics.nu / metrics.spatial_period,
    })
}

struct Memo<T> {
    map: HashMap<Vec<i64>, T>,
}

impl<T: Real> Memo<T> {
    fn key(coeffs: &[T]) -> Vec<i64> {
        coeffs
            .iter()
            .map(|&v| {
                let r = (v.to_f64().unwrap_or(0.0) / 1e-12).round();
                r as i64
            })
            .collect()
    }
}

/// Run the bounded simplex search.
pub fn optimize_profile<T: Real>(spec: &DesignSpec<T>) -> Result<DesignResult<T>> {
    spec.validate()?;
    let dim_all = spec.bounds.len();

    // Frozen coordinates (lo == hi) are pinned and excluded from the simplex.
    let free: Vec<usize> = (0..dim_all)
        .filter(|&i| spec.bounds[i].1 > spec.bounds[i].0)
        .collect();
    let base: Vec<T> = spec
        .bounds
        .iter()
        .map(|&(lo, hi)| (lo + hi) * T::half())
        .collect();

    let mut memo = Memo {
        map: HashMap::new(),
    };
    let mut evaluations = 0usize;
    let mut history: Vec<HistoryEntry<T>> = Vec::new();
    let mut best_coeffs = clamp_all(&base, &spec.bounds);
    let mut best_val = T::neg_infinity();
    let mut budget_exhausted = false;

    let eval = |coeffs: &Vec<T>,
                    evaluations: &mut usize,
                    memo: &mut Memo<T>,
                    history: &mut Vec<HistoryEntry<T>>,
                    best_coeffs: &mut Vec<T>,
                    best_val: &mut T|
     -> Result<Option<T>> {
        let key = Memo::<T>::key(coeffs);
        if let Some(&v) = memo.map.get(&key) {
            return Ok(Some(v));
        }
        if *evaluations >= spec.max_evals {
            return Ok(None);
        }
        *evaluations += 1;
        let v = evaluate_objective(coeffs, spec.m_max, spec.objective)?;
        memo.map.insert(key, v);
        if v > *best_val {
            *best_val = v;
            *best_coeffs = coeffs.clone();
            history.push(HistoryEntry {
                eval: *evaluations,
                coeffs: coeffs.clone(),
                objective: v,
            });
        }
        Ok(Some(v))
    };

    // Degenerate case: every coordinate pinned, nothing to search.
    if free.is_empty() {
        let point = best_coeffs.clone();
        let v = eval(
            &point,
            &mut evaluations,
            &mut memo,
            &mut history,
            &mut best_coeffs,
            &mut best_val,
        )?
        .expect("budget >= 1");
        let profile = profile_from_coeffs(&best_coeffs, spec.m_max);
        let metrics = stopband_metrics(&profile, T::of(1e-10))?;
        return Ok(DesignResult {
            best: profile,
            metrics,
            history,
            coeffs: best_coeffs,
            objective_value: v,
            evaluations,
            budget_exhausted: false,
        });
    }

    let n = free.len();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let n_restarts = 3usize;
    let mut start = base.clone();

    'restarts: for restart in 0..n_restarts {
        // Initial simplex: start point plus one step of 10% of each bound
        // range along every free coordinate.
        let mut simplex: Vec<Vec<T>> = Vec::with_capacity(n + 1);
        simplex.push(clamp_all(&start, &spec.bounds));
        for (k, &i) in free.iter().enumerate() {
            let mut p = start.clone();
            let range = spec.bounds[i].1 - spec.bounds[i].0;
            let mut step = range * T::of(0.1);
            if restart > 0 {
                let jitter: f64 = rng.gen_range(0.5..1.5);
                let sign: f64 = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                step = step * T::of(jitter * sign);
            }
            p[i] = p[i] + step;
            let _ = k;
            simplex.push(clamp_all(&p, &spec.bounds));
        }

        let mut values: Vec<T> = Vec::with_capacity(n + 1);
        for p in &simplex {
            match eval(
                p,
                &mut evaluations,
                &mut memo,
                &mut history,
                &mut best_coeffs,
                &mut best_val,
            )? {
                Some(v) => values.push(v),
                None => {
                    budget_exhausted = true;
                    break 'restarts;
                }
            }
        }

        let (alpha, gamma, rho, sigma) = (T::one(), T::two(), T::half(), T::half());
        loop {
            // Sort simplex descending by objective (we maximize).
            let mut order: Vec<usize> = (0..simplex.len()).collect();
            order.sort_by(|&i, &j| {
                values[j]
                    .partial_cmp(&values[i])
                    .unwrap_or(std::cmp::Ordering::Equal)
            });
            let reorder_s: Vec<Vec<T>> = order.iter().map(|&i| simplex[i].clone()).collect();
            let reorder_v: Vec<T> = order.iter().map(|&i| values[i]).collect();
            simplex = reorder_s;
            values = reorder_v;

            // Convergence: simplex collapsed in value and coordinates.
            let spread = values[0] - values[n];
            let mut diameter = T::zero();
            for p in &simplex[1..] {
                for &i in &free {
                    diameter = diameter.max((p[i] - simplex[0][i]).abs());
                }
            }
            if spread.abs() < T::of(1e-15) * (T::one() + values[0].abs())
                && diameter < T::of(1e-11)
            {
                break;
            }

            // Centroid of all but the worst.
            let mut centroid = simplex[0].clone();
            for &i in &free {
                let mut acc = T::zero();
                for p in simplex.iter().take(n) {
                    acc += p[i];
                }
                centroid[i] = acc / T::of(n as f64);
            }

            let worst = simplex[n].clone();
            let reflect = |t: T| -> Vec<T> {
                let mut p = centroid.clone();
                for &i in &free {
                    p[i] = centroid[i] + t * (centroid[i] - worst[i]);
                }
                clamp_all(&p, &spec.bounds)
            };

            let xr = reflect(alpha);
            let fr = match eval(
                &xr,
                &mut evaluations,
                &mut memo,
                &mut history,
                &mut best_coeffs,
                &mut best_val,
            )? {
                Some(v) => v,
                None => {
                    budget_exhausted = true;
                    break 'restarts;
                }
            };

            if fr > values[0] {
                // Expansion.
                let xe = reflect(gamma);
                let fe = match eval(
                    &xe,
                    &mut evaluations,
                    &mut memo,
                    &mut history,
                    &mut best_coeffs,
                    &mut best_val,
                )? {
                    Some(v) => v,
                    None => {
                        budget_exhausted = true;
                        break 'restarts;
                    }
                };
                if fe > fr {
                    simplex[n] = xe;
                    values[n] = fe;
                } else {
                    simplex[n] = xr;
                    values[n] = fr;
                }
                continue;
            }
            if fr > values[n - 1] {
                simplex[n] = xr;
                values[n] = fr;
                continue;
            }

            // Contraction toward the centroid.
            let xc = reflect(-rho);
            let fc = match eval(
                &xc,
                &mut evaluations,
                &mut memo,
                &mut history,
                &mut best_coeffs,
                &mut best_val,
            )? {
                Some(v) => v,
                None => {
                    budget_exhausted = true;
                    break 'restarts;
                }
            };
            if fc > values[n] {
                simplex[n] = xc;
                values[n] = fc;
                continue;
            }

            // Shrink toward the best point.
            let best_point = simplex[0].clone();
            let mut collapsed = true;
            for j in 1..=n {
                let mut p = best_point.clone();
                for &i in &free {
                    p[i] = best_point[i] + sigma * (simplex[j][i] - best_point[i]);
                }
                let p = clamp_all(&p, &spec.bounds);
                if p != simplex[0] {
                    collapsed = false;
                }
                let fv = match eval(
                    &p,
                    &mut evaluations,
                    &mut memo,
                    &mut history,
                    &mut best_coeffs,
                    &mut best_val,
                )? {
                    Some(v) => v,
                    None => {
                        budget_exhausted = true;
                        break 'restarts;
                    }
                };
                simplex[j] = p;
                values[j] = fv;
            }
            if collapsed {
                break;
            }
        }

        start = best_coeffs.clone();
    }

    let profile = profile_from_coeffs(&best_coeffs, spec.m_max);
    let metrics = stopband_metrics(&profile, T::of(1e-10))?;
    Ok(DesignResult {
        best: profile,
        metrics,
        objective_value: best_val,
        coeffs: best_coeffs,
        history,
        evaluations,
        budget_exhausted,
    })
}

fn clamp_all<T: Real>(p: &[T], bounds: &[(T, T)]) -> Vec<T> {
    p.iter()
        .zip(bounds.iter())
        .map(|(&v, &(lo, hi))| v.max(lo).min(hi))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn single_coefficient_hits_upper_bound() {
        // nu = (pi/2) b2 is linear: the optimum is the bound.
        let spec = DesignSpec {
            m_max: 1,
            bounds: vec![(0.0f64, 0.0), (-0.5, 0.5)],
            objective: Objective::MaximizeNu,
            max_evals: 2000,
            seed: 7,
        };
        let res = optimize_profile(&spec).unwrap();
        assert!(
            (res.coeffs[1] - 0.5).abs() < 1e-10,
            "b2 = {} (want 0.5)",
            res.coeffs[1]
        );
        assert!((res.objective_value - PI / 4.0).abs() < 1e-8);
        assert!(!res.budget_exhausted);
    }

    #[test]
    fn all_bounds_zero_returns_zero_profile() {
        let spec = DesignSpec {
            m_max: 1,
            bounds: vec![(0.0f64, 0.0), (0.0, 0.0)],
            objective: Objective::MaximizeNu,
            max_evals: 10,
            seed: 1,
        };
        let res = optimize_profile(&spec).unwrap();
        assert!(res.objective_value.abs() < 1e-12);
        assert_eq!(res.evaluations, 1);
    }

    #[test]
    fn history_is_monotone() {
        let spec = DesignSpec {
            m_max: 1,
            bounds: vec![(-0.5f64, 0.5), (-0.5, 0.5)],
            objective: Objective::MaximizeMu,
            max_evals: 500,
            seed: 42,
        };
        let res = optimize_profile(&spec).unwrap();
        for w in res.history.windows(2) {
            assert!(w[1].objective >= w[0].objective);
            assert!(w[1].eval >= w[0].eval);
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let spec = DesignSpec {
            m_max: 1,
            bounds: vec![(-0.5f64, 0.5), (-0.5, 0.5)],
            objective: Objective::MaximizeMu,
            max_evals: 300,
            seed: 9,
        };
        let a = optimize_profile(&spec).unwrap();
        let b = optimize_profile(&spec).unwrap();
        assert_eq!(a.evaluations, b.evaluations);
        assert_eq!(a.history.len(), b.history.len());
        for (ha, hb) in a.history.iter().zip(b.history.iter()) {
            assert_eq!(ha.eval, hb.eval);
            assert_eq!(ha.coeffs, hb.coeffs);
            assert!(ha.objective == hb.objective);
        }
    }

    #[test]
    fn mu_objective_beats_nu_objective_on_mu() {
        let bounds = vec![(-0.5f64, 0.5), (-0.5, 0.5)];
        let nu_spec = DesignSpec {
            m_max: 1,
            bounds: bounds.clone(),
            objective: Objective::MaximizeNu,
            max_evals: 2000,
            seed: 3,
        };
        let mu_spec = DesignSpec {
            m_max: 1,
            bounds,
            objective: Objective::MaximizeMu,
            max_evals: 2000,
            seed: 3,
        };
        let nu_res = optimize_profile(&nu_spec).unwrap();
        let mu_res = optimize_profile(&mu_spec).unwrap();
        let mu_of_nu = nu_res.metrics.nu / nu_res.metrics.spatial_period;
        let mu_of_mu = mu_res.metrics.nu / mu_res.metrics.spatial_period;
        assert!(
            mu_of_mu >= mu_of_nu - 1e-12,
            "mu objective {mu_of_mu} vs nu objective {mu_of_nu}"
        );
        assert!(mu_of_mu > mu_of_nu + 1e-3, "expected strict improvement");
    }

    #[test]
    fn wider_search_space_does_not_lose_ground() {
        // m_max = 2 includes the m_max = 1 optimum (extra coefficients may
        // sit at 0), so the best mu cannot be worse.
        let small = DesignSpec {
            m_max: 1,
            bounds: vec![(-0.4f64, 0.4), (-0.4, 0.4)],
            objective: Objective::MaximizeMu,
            max_evals: 2000,
            seed: 5,
        };
        let wide = DesignSpec {
            m_max: 2,
            bounds: vec![(-0.4f64, 0.4); 4],
            objective: Objective::MaximizeMu,
            max_evals: 4000,
            seed: 5,
        };
        let a = optimize_profile(&small).unwrap();
        let b = optimize_profile(&wide).unwrap();
        assert!(
            b.objective_value >= a.objective_value - 1e-9,
            "wide {} vs small {}",
            b.objective_value,
            a.objective_value
        );
    }

    #[test]
    fn budget_exhaustion_flagged() {
        let spec = DesignSpec {
            m_max: 1,
            bounds: vec![(-0.5f64, 0.5), (-0.5, 0.5)],
            objective: Objective::MaximizeNu,
            max_evals: 5,
            seed: 1,
        };
        let res = optimize_profile(&spec).unwrap();
        assert!(res.budget_exhausted);
        assert_eq!(res.evaluations, 5);
    }
}
