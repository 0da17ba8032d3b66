//! Aggregate interference from a Poisson field of secondary transmitters.
//!
//! Transmitters form a PPP of intensity `pλ` outside a protection profile
//! `d(θ)` around the radar. Campbell's theorem gives every cumulant of the
//! aggregate in closed form up to an azimuth integral:
//!
//! ```text
//!   κ_n = pλ·cⁿ ∫ Gⁿ(θ)·(lo(θ)^{2−nα} − hi(θ)^{2−nα}) / (nα − 2) dθ,   c = P·K₀/FDR
//! ```
//!
//! for the annular region `lo(θ) ≤ r ≤ hi(θ)` (`hi = ∞` unless truncated).

mod monte_carlo;
mod optimality;
mod policy;

pub use monte_carlo::{
    exceedance, mean_and_variance, sample_aggregate, sample_aggregate_hybrid, HybridSamples, SamplerOptions,
    MAX_TAIL_FRACTION,
};
pub use optimality::{constrained_area, verify_local_optimality, OptimalityReport, OptimalityTrial};
pub use policy::{
    optimize_beta, protected_area_m2, sample_profile, solve_main_side, solve_optimal_profile, solve_radar_blind,
    BetaSearch, PolicyExport, PolicyProfile, ProfilePoint, SharingPolicy,
};

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_gauss_legendre, q_inverse, q_tail};
use crate::propagation::{AntennaPattern, PathLossModel};
use crate::protection_single::SecondaryUser;

/// Spatial deployment of secondary networks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeploymentField {
    /// Network density per square meter.
    pub density_per_m2: f64,
    /// Fraction of time each network is transmitting.
    pub activity_prob: f64,
    /// Largest acceptable `Pr{I_aggr > I_max}`.
    pub outage_max: f64,
}

impl DeploymentField {
    pub fn new(density_per_m2: f64, activity_prob: f64, outage_max: f64) -> Result<Self> {
        let f = DeploymentField {
            density_per_m2,
            activity_prob,
            outage_max,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.density_per_m2 > 0.0 && self.density_per_m2.is_finite()) {
            return Err(Error::invalid("field.density_per_m2", "must be positive"));
        }
        if !(self.activity_prob > 0.0 && self.activity_prob <= 1.0) {
            return Err(Error::invalid("field.activity_prob", "must lie in (0, 1]"));
        }
        if !(self.outage_max > 0.0 && self.outage_max < 0.5) {
            return Err(Error::invalid("field.outage_max", "must lie in (0, 0.5)"));
        }
        Ok(())
    }

    /// Density of simultaneously active transmitters, `pλ`.
    pub fn active_density(&self) -> f64 {
        self.density_per_m2 * self.activity_prob
    }
}

/// Mean and variance of the aggregate interference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampbellStats {
    pub mean_w: f64,
    pub variance_w2: f64,
    /// `pλ·P·K₀ / (FDR·(α−2))`.
    pub c_mu: f64,
    /// `pλ·P²·K₀² / (FDR²·(2α−2))`.
    pub c_sigma2: f64,
}

impl CampbellStats {
    pub fn std_dev_w(&self) -> f64 {
        self.variance_w2.sqrt()
    }

    /// `μ + Q⁻¹(P_out)·σ`, the quantity the outage constraint caps at `I_max`.
    pub fn design_level_w(&self, outage_max: f64) -> Result<f64> {
        Ok(self.mean_w + q_inverse(outage_max)? * self.std_dev_w())
    }
}

/// Azimuth-dependent keep-out distance around the radar.
///
/// Angles are radians measured from the boresight direction, any real value.
pub trait ProtectionProfile: Sync {
    fn distance_m(&self, theta_rad: f64) -> f64;

    /// A lower bound of [`Self::distance_m`] on `[a, b] ⊂ [0, 2π]`, exact for
    /// the built-in profiles.
    fn min_distance_on(&self, a: f64, b: f64) -> f64;

    fn max_distance_m(&self) -> f64;

    /// Angles where the profile is not smooth; quadrature splits there.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// The same distance in every direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantProfile(pub f64);

impl ProtectionProfile for ConstantProfile {
    fn distance_m(&self, _theta_rad: f64) -> f64 {
        self.0
    }

    fn min_distance_on(&self, _a: f64, _b: f64) -> f64 {
        self.0
    }

    fn max_distance_m(&self) -> f64 {
        self.0
    }
}

/// Everything needed to evaluate aggregate interference at the radar:
/// field, transmitter power, receive pattern, power-law attenuation and FDR.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateModel {
    pub field: DeploymentField,
    pub eirp_w: f64,
    pub pattern: AntennaPattern,
    pub k0: f64,
    pub alpha: f64,
    pub fdr: f64,
}

/// Quadrature panels per radian of azimuth.
const PANELS_PER_RADIAN: f64 = 400.0;

impl AggregateModel {
    pub fn new(
        field: DeploymentField,
        su: &SecondaryUser,
        pattern: AntennaPattern,
        model: &PathLossModel,
        fdr: f64,
    ) -> Result<Self> {
        field.validate()?;
        su.validate()?;
        let (k0, alpha) = model.power_law_params().ok_or(Error::PowerLawRequired)?;
        if !(alpha > 2.0) {
            return Err(Error::ConvergenceViolation { alpha, required: 2.0 });
        }
        if !(fdr >= 1.0 && fdr.is_finite()) {
            return Err(Error::invalid("fdr", "must be finite and at least 1"));
        }
        Ok(AggregateModel {
            field,
            eirp_w: su.eirp_w,
            pattern,
            k0,
            alpha,
            fdr,
        })
    }

    /// `c = P·K₀/FDR`: the contribution of a transmitter at unit gain and range.
    pub fn unit_contribution(&self) -> f64 {
        self.eirp_w * self.k0 / self.fdr
    }

    pub fn c_mu(&self) -> f64 {
        self.field.active_density() * self.unit_contribution() / (self.alpha - 2.0)
    }

    pub fn c_sigma2(&self) -> f64 {
        self.field.active_density() * self.unit_contribution().powi(2) / (2.0 * self.alpha - 2.0)
    }

    /// Interference contributed by one transmitter at `(r, θ)`.
    pub fn contribution_w(&self, r: f64, theta_rad: f64) -> f64 {
        self.unit_contribution() * self.pattern.gain_linear(theta_rad) * r.powf(-self.alpha)
    }

    /// Non-smooth points of the gain pattern in radians.
    pub fn pattern_breakpoints(&self) -> Vec<f64> {
        let p = &self.pattern;
        [p.theta_m_deg, p.theta_r_deg, p.theta_b_deg]
            .iter()
            .flat_map(|d| [d.to_radians(), -d.to_radians()])
            .collect()
    }

    /// `∫₀^{2π} f dθ`, split at the pattern breakpoints and `extra`.
    pub fn integrate_azimuth(&self, f: impl Fn(f64) -> f64, extra: &[f64]) -> f64 {
        let mut breaks = self.pattern_breakpoints();
        breaks.extend_from_slice(extra);
        integrate_pieces(f, 0.0, TAU, &breaks)
    }

    /// `∫_a^b f dθ` split at the pattern breakpoints and `extra`.
    pub fn integrate_between(&self, f: impl Fn(f64) -> f64, a: f64, b: f64, extra: &[f64]) -> f64 {
        let mut breaks = self.pattern_breakpoints();
        breaks.extend_from_slice(extra);
        integrate_pieces(f, a, b, &breaks)
    }

    /// `∫ Gᵖ dθ` over the full turn.
    pub fn gain_moment(&self, power: f64) -> f64 {
        self.integrate_azimuth(|t| self.pattern.gain_linear(t).powf(power), &[])
    }

    /// n-th cumulant of the aggregate from transmitters with
    /// `lo(θ) ≤ r ≤ hi(θ)` (`hi = None` for an unbounded region).
    pub fn region_cumulant(
        &self,
        n: i32,
        lo: &dyn Fn(f64) -> f64,
        hi: Option<&dyn Fn(f64) -> f64>,
        breakpoints: &[f64],
    ) -> f64 {
        let nf = n as f64;
        let e = 2.0 - nf * self.alpha;
        let integral = self.integrate_azimuth(
            |t| {
                let far = hi.map_or(0.0, |h| h(t).powf(e));
                self.pattern.gain_linear(t).powi(n) * (lo(t).powf(e) - far)
            },
            breakpoints,
        );
        self.field.active_density() * self.unit_contribution().powi(n) * integral / (nf * self.alpha - 2.0)
    }

    /// Campbell mean and variance for transmitters outside `profile`.
    pub fn campbell_stats(&self, profile: &dyn ProtectionProfile) -> CampbellStats {
        let breaks = profile.breakpoints();
        let lo = |t: f64| profile.distance_m(t);
        CampbellStats {
            mean_w: self.region_cumulant(1, &lo, None, &breaks),
            variance_w2: self.region_cumulant(2, &lo, None, &breaks),
            c_mu: self.c_mu(),
            c_sigma2: self.c_sigma2(),
        }
    }

    /// Campbell mean and variance for transmitters between `profile` and a
    /// circle of radius `outer_radius_m`.
    pub fn campbell_stats_truncated(&self, profile: &dyn ProtectionProfile, outer_radius_m: f64) -> CampbellStats {
        let breaks = profile.breakpoints();
        let lo = |t: f64| profile.distance_m(t);
        let hi = |_: f64| outer_radius_m;
        CampbellStats {
            mean_w: self.region_cumulant(1, &lo, Some(&hi), &breaks),
            variance_w2: self.region_cumulant(2, &lo, Some(&hi), &breaks),
            c_mu: self.c_mu(),
            c_sigma2: self.c_sigma2(),
        }
    }

    /// Outage-constraint value `μ + Q⁻¹(P_out)·σ − I_max` (zero when met with equality).
    pub fn constraint_residual(&self, profile: &dyn ProtectionProfile, i_max_w: f64) -> Result<f64> {
        Ok(self.campbell_stats(profile).design_level_w(self.field.outage_max)? - i_max_w)
    }
}

/// Split `[a, b]` at every breakpoint (taken modulo 2π) and integrate each
/// piece with Gauss-Legendre, so no node ever sits on a discontinuity.
fn integrate_pieces(f: impl Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]) -> f64 {
    let mut cuts: Vec<f64> = vec![a, b];
    for &x in breaks {
        let x = x.rem_euclid(TAU);
        for y in [x - TAU, x, x + TAU] {
            if y > a && y < b {
                cuts.push(y);
            }
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let n = ((w[1] - w[0]) * PANELS_PER_RADIAN).ceil().max(4.0) as usize;
            integrate_gauss_legendre(&f, w[0], w[1], n)
        })
        .sum()
}

/// `Pr{I_aggr > I_max}` under the Gaussian approximation; a step when σ = 0.
pub fn outage_probability(stats: &CampbellStats, i_max_w: f64) -> f64 {
    let sigma = stats.std_dev_w();
    if sigma == 0.0 {
        return if stats.mean_w < i_max_w { 0.0 } else { 1.0 };
    }
    q_tail((i_max_w - stats.mean_w) / sigma)
}

/// Two-sided binomial confidence interval (normal approximation) for an
/// exceedance frequency estimated from `n` samples.
pub fn binomial_interval(p: f64, n: usize, z: f64) -> (f64, f64) {
    let half = z * (p * (1.0 - p) / n as f64).sqrt();
    (p - half, p + half)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrate_periodic;
    use proptest::prelude::*;

    pub(crate) fn fixture() -> AggregateModel {
        let field = DeploymentField::new(1e-6, 1.0, 0.1).unwrap();
        AggregateModel::new(
            field,
            &SecondaryUser::wifi_ap(),
            AntennaPattern::new(33.5).unwrap(),
            &PathLossModel::type_b_fit(),
            20e6 / 653e3,
        )
        .unwrap()
    }

    #[test]
    fn field_validation() {
        assert!(DeploymentField::new(0.0, 0.5, 0.1).is_err());
        assert!(DeploymentField::new(1.0, 0.0, 0.1).is_err());
        assert!(DeploymentField::new(1.0, 1.0, 0.5).is_err());
        assert!(DeploymentField::new(1.0, 1.0, 0.49).is_ok());
    }

    #[test]
    fn model_rejects_divergent_exponent() {
        let field = DeploymentField::new(1e-6, 1.0, 0.1).unwrap();
        let su = SecondaryUser::wifi_ap();
        let p = AntennaPattern::new(33.5).unwrap();
        let e = AggregateModel::new(field, &su, p, &PathLossModel::power_law(1.0, 2.0).unwrap(), 1.0);
        assert!(matches!(e, Err(Error::ConvergenceViolation { .. })));
        let tab = crate::propagation::TabulatedPathLoss::new(vec![(1.0, 1.0), (2.0, 0.1)], false).unwrap();
        let e = AggregateModel::new(field, &su, p, &PathLossModel::Tabulated(tab), 1.0);
        assert!(matches!(e, Err(Error::PowerLawRequired)));
    }

    #[test]
    fn isotropic_closed_form() {
        let mut m = fixture();
        m.alpha = 4.0;
        m.k0 = 3.0;
        m.fdr = 2.0;
        let d0 = 500.0;
        let mean = m.campbell_stats(&ConstantProfile(d0)).mean_w;
        // closed form for G ≡ 1, scaled by the pattern's average gain
        let avg_gain = integrate_periodic(|t| m.pattern.gain_linear(t), 1 << 22) / TAU;
        let expected = m.field.active_density() * m.eirp_w * m.k0 * TAU * d0.powi(-2) / (2.0 * m.fdr) * avg_gain;
        assert!(((mean - expected) / expected).abs() < 1e-7);
    }

    #[test]
    fn linear_in_density_and_power() {
        let m = fixture();
        let s1 = m.campbell_stats(&ConstantProfile(1.4e6));
        let mut m2 = m.clone();
        m2.field.activity_prob = 0.5;
        m2.field.density_per_m2 = 4e-6;
        let s2 = m2.campbell_stats(&ConstantProfile(1.4e6));
        assert!((s2.mean_w / s1.mean_w - 2.0).abs() < 1e-12);
        assert!((s2.variance_w2 / s1.variance_w2 - 2.0).abs() < 1e-12);
        let mut m3 = m.clone();
        m3.eirp_w *= 2.0;
        let s3 = m3.campbell_stats(&ConstantProfile(1.4e6));
        assert!((s3.mean_w / s1.mean_w - 2.0).abs() < 1e-12);
        assert!((s3.variance_w2 / s1.variance_w2 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn constant_profile_matches_coefficients() {
        let m = fixture();
        let d = 1.2e6;
        let s = m.campbell_stats(&ConstantProfile(d));
        let mean = s.c_mu * d.powf(2.0 - m.alpha) * m.gain_moment(1.0);
        let var = s.c_sigma2 * d.powf(2.0 - 2.0 * m.alpha) * m.gain_moment(2.0);
        assert!(((s.mean_w - mean) / mean).abs() < 1e-12);
        assert!(((s.variance_w2 - var) / var).abs() < 1e-12);
    }

    #[test]
    fn gain_moment_accuracy() {
        let m = fixture();
        let oracle = integrate_periodic(|t| m.pattern.gain_linear(t), 1 << 22);
        assert!(((m.gain_moment(1.0) - oracle) / oracle).abs() < 1e-7);
    }

    #[test]
    fn truncated_stats_approach_full() {
        let m = fixture();
        let p = ConstantProfile(1e4);
        let full = m.campbell_stats(&p);
        let t = m.campbell_stats_truncated(&p, 1e4 * 100.0);
        let tail = 1.0 - t.mean_w / full.mean_w;
        assert!((tail - 100f64.powf(2.0 - m.alpha)).abs() < 1e-9);
    }

    #[test]
    fn outage_examples() {
        let s = CampbellStats {
            mean_w: 2.0,
            variance_w2: 0.25,
            c_mu: 0.0,
            c_sigma2: 0.0,
        };
        assert!((outage_probability(&s, 2.0) - 0.5).abs() < 1e-15);
        assert!((outage_probability(&s, 2.0 + 1.2816 * 0.5) - 0.1).abs() < 1e-4);
        let z = CampbellStats { variance_w2: 0.0, ..s };
        assert_eq!(outage_probability(&z, 2.5), 0.0);
        assert_eq!(outage_probability(&z, 1.5), 1.0);
    }

    #[test]
    fn design_level_against_table_budget() {
        let m = fixture();
        let s = m.campbell_stats(&ConstantProfile(1.4e6));
        let level = s.design_level_w(0.1).unwrap();
        assert!(level > s.mean_w);
        assert!((outage_probability(&s, level) - 0.1).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn integration_rotation_invariant(shift in 0.0f64..TAU) {
            let m = fixture();
            let a = m.integrate_azimuth(|t| m.pattern.gain_linear(t), &[]);
            let b = m.integrate_azimuth(|t| m.pattern.gain_linear(t + shift), &[-shift]);
            let mut breaks: Vec<f64> = m.pattern_breakpoints().iter().map(|x| x - shift).collect();
            breaks.push(-shift);
            let c = m.integrate_azimuth(|t| m.pattern.gain_linear(t + shift), &breaks);
            prop_assert!(((c - a) / a).abs() < 1e-9);
            prop_assert!(((b - a) / a).abs() < 1e-2);
        }
    }
}
