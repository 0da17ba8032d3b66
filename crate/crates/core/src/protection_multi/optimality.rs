//! Empirical check that `γ·G^{1/α}` minimises the protected area.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::policy::{solve_two_term, SharingPolicy};
use super::{AggregateModel, ProtectionProfile};
use crate::error::{Error, Result};
use crate::numerics::q_inverse;

/// Harmonics in each random perturbation.
const HARMONICS: usize = 6;

/// An arbitrary smooth profile shape; only its sampled values are used.
struct ShapeProfile<'a> {
    shape: &'a (dyn Fn(f64) -> f64 + Sync),
    breakpoints: Vec<f64>,
}

impl ProtectionProfile for ShapeProfile<'_> {
    fn distance_m(&self, theta_rad: f64) -> f64 {
        (self.shape)(theta_rad)
    }

    fn min_distance_on(&self, _a: f64, _b: f64) -> f64 {
        0.0
    }

    fn max_distance_m(&self) -> f64 {
        f64::INFINITY
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breakpoints.clone()
    }
}

/// Scale `shape` so the outage constraint holds with equality and return the
/// resulting protected area.
pub fn constrained_area(model: &AggregateModel, i_max_w: f64, shape: &(dyn Fn(f64) -> f64 + Sync)) -> Result<f64> {
    let profile = ShapeProfile {
        shape,
        breakpoints: Vec::new(),
    };
    let s = model.campbell_stats(&profile);
    let q = q_inverse(model.field.outage_max)?;
    // scaling by x multiplies μ by x^{2−α} and σ by x^{1−α}
    let x = solve_two_term(s.mean_w, q * s.std_dev_w(), model.alpha, i_max_w)?;
    let base = model.integrate_azimuth(|t| shape(t).powi(2) / 2.0, &[]);
    Ok(x * x * base)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalityTrial {
    pub trial: usize,
    pub amplitude: f64,
    pub area_m2: f64,
    /// `(area − optimal) / optimal`.
    pub relative_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub optimal_area_m2: f64,
    pub trials: Vec<OptimalityTrial>,
}

impl OptimalityReport {
    pub fn smallest_relative_change(&self) -> f64 {
        self.trials.iter().map(|t| t.relative_change).fold(f64::INFINITY, f64::min)
    }
}

/// Perturb the optimal profile multiplicatively by random smooth Fourier
/// series, restore the constraint by rescaling, and confirm no trial lowers
/// the area by more than `tolerance` (relative).
pub fn verify_local_optimality(
    policy: &SharingPolicy,
    model: &AggregateModel,
    i_max_w: f64,
    n_perturbations: usize,
    seed: u64,
    tolerance: f64,
) -> Result<OptimalityReport> {
    let SharingPolicy::Optimal { gamma, alpha } = *policy else {
        return Err(Error::invalid("policy", "optimality check needs the optimal policy"));
    };
    let pattern = model.pattern;
    let base = move |t: f64| gamma * pattern.gain_linear(t).powf(1.0 / alpha);
    let optimal_area_m2 = constrained_area(model, i_max_w, &base)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trials = Vec::with_capacity(n_perturbations);
    for trial in 0..n_perturbations {
        let coeffs: Vec<(f64, f64)> = (1..=HARMONICS)
            .map(|k| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                (a / k as f64, b / k as f64)
            })
            .collect();
        let norm: f64 = coeffs.iter().map(|(a, b)| a.abs() + b.abs()).sum();
        let amplitude = rng.random_range(0.01..0.3);
        let delta = move |t: f64| -> f64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let kt = (k + 1) as f64 * t;
                    a * kt.cos() + b * kt.sin()
                })
                .sum::<f64>()
                / norm
        };
        let perturbed = |t: f64| base(t) * (amplitude * delta(t)).exp();
        let area_m2 = constrained_area(model, i_max_w, &perturbed)?;
        let relative_change = (area_m2 - optimal_area_m2) / optimal_area_m2;
        if relative_change < -tolerance {
            return Err(Error::OptimalityViolation {
                trial,
                perturbed_area: area_m2,
                optimal_area: optimal_area_m2,
            });
        }
        trials.push(OptimalityTrial {
            trial,
            amplitude,
            area_m2,
            relative_change,
        });
    }
    Ok(OptimalityReport {
        optimal_area_m2,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::super::tests::fixture;
    use super::super::{protected_area_m2, solve_optimal_profile};
    use super::*;

    const I_MAX: f64 = 5.26e-16;

    #[test]
    fn zero_perturbation_keeps_area() {
        let m = fixture();
        let p = solve_optimal_profile(&m, I_MAX).unwrap();
        let SharingPolicy::Optimal { gamma, alpha } = p else { panic!() };
        let area = constrained_area(&m, I_MAX, &|t| gamma * m.pattern.gain_linear(t).powf(1.0 / alpha)).unwrap();
        assert!(((area - protected_area_m2(&p, &m)) / area).abs() < 1e-9);
    }

    #[test]
    fn seeded_perturbations_never_improve() {
        let m = fixture();
        let p = solve_optimal_profile(&m, I_MAX).unwrap();
        let r = verify_local_optimality(&p, &m, I_MAX, 20, 1, 1e-3).unwrap();
        assert_eq!(r.trials.len(), 20);
        assert!(r.smallest_relative_change() > -1e-3);
    }

    #[test]
    fn wrong_exponent_is_worse() {
        let m = fixture();
        let p = solve_optimal_profile(&m, I_MAX).unwrap();
        let opt = protected_area_m2(&p, &m);
        let wrong = constrained_area(&m, I_MAX, &|t| m.pattern.gain_linear(t).powf(1.0 / (m.alpha + 1.0))).unwrap();
        assert!(wrong > opt * 1.001);
    }

    #[test]
    fn rejects_other_policies() {
        let m = fixture();
        let p = SharingPolicy::RadarBlind { d_min_m: 1.0 };
        assert!(verify_local_optimality(&p, &m, I_MAX, 1, 0, 1e-3).is_err());
    }
}
