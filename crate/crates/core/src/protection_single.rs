//! Tolerable interference budget and single-transmitter protection distance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{
    attenuation, brick_wall_filter, fdr_cochannel, fdr_general, flat_spectrum, invert_attenuation,
    AntennaPattern, PathLossModel,
};
use crate::protection_multi::SharingPolicy;
use crate::radar::{noise_power_w, snr_required_albersheim, RadarSystem, RocPoint};
use crate::units::{db_to_linear, linear_to_db};

/// A WiFi transmitter sharing the radar band.
///
/// `eirp_w` already includes the transmit antenna gain; `antenna_gain_dbi` is
/// applied only when the device receives (radar-to-WiFi interference).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondaryUser {
    pub eirp_w: f64,
    pub bandwidth_hz: f64,
    pub antenna_gain_dbi: f64,
    pub antenna_height_m: f64,
    pub noise_figure_db: f64,
    /// Carrier offset from the radar centre frequency.
    pub delta_f_hz: f64,
}

impl SecondaryUser {
    /// 1 W EIRP, 20 MHz, dipole antenna at 3 m, co-channel.
    pub fn wifi_ap() -> Self {
        SecondaryUser {
            eirp_w: 1.0,
            bandwidth_hz: 20e6,
            antenna_gain_dbi: 2.15,
            antenna_height_m: 3.0,
            noise_figure_db: 8.0,
            delta_f_hz: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eirp_w > 0.0 && self.eirp_w.is_finite()) {
            return Err(Error::invalid("su.eirp_w", "must be positive"));
        }
        if !(self.bandwidth_hz > 0.0 && self.bandwidth_hz.is_finite()) {
            return Err(Error::invalid("su.bandwidth_hz", "must be positive"));
        }
        for (name, v) in [
            ("su.antenna_gain_dbi", self.antenna_gain_dbi),
            ("su.antenna_height_m", self.antenna_height_m),
            ("su.noise_figure_db", self.noise_figure_db),
            ("su.delta_f_hz", self.delta_f_hz),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn antenna_gain_linear(&self) -> f64 {
        db_to_linear(self.antenna_gain_dbi)
    }

    /// Rejection of this transmitter's spectrum by a radar IF filter.
    ///
    /// Co-channel uses the bandwidth ratio; with a carrier offset a flat
    /// transmit spectrum is passed through an ideal IF filter.
    pub fn fdr(&self, victim_if_bw_hz: f64) -> Result<f64> {
        if self.delta_f_hz == 0.0 {
            return Ok(fdr_cochannel(self.bandwidth_hz, victim_if_bw_hz));
        }
        let span = self.bandwidth_hz.max(victim_if_bw_hz) * 1.5;
        let n = ((span / victim_if_bw_hz.min(self.bandwidth_hz)) * 200.0).clamp(2001.0, 200_001.0) as usize;
        let psd = flat_spectrum(0.0, self.bandwidth_hz, span, n);
        fdr_general(&psd, &brick_wall_filter(0.0, victim_if_bw_hz), self.delta_f_hz)
    }
}

/// Extra interference a radar can absorb while staying at its degraded
/// operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterferenceBudget {
    pub i_max_w: f64,
    pub inr_db: f64,
    pub sinr_required_linear: f64,
    pub baseline_snr_linear: f64,
}

impl InterferenceBudget {
    pub fn admits_interference(&self) -> bool {
        self.i_max_w > 0.0
    }
}

/// `I_max = N·(SNR_baseline / SINR_required − 1)`, floored at zero.
pub fn max_tolerable_interference(
    radar: &RadarSystem,
    baseline_snr: f64,
    sinr_required: f64,
) -> Result<InterferenceBudget> {
    if !(baseline_snr > 0.0) {
        return Err(Error::domain("max_tolerable_interference", "baseline SNR must be positive"));
    }
    if !(sinr_required > 0.0) {
        return Err(Error::domain("max_tolerable_interference", "required SINR must be positive"));
    }
    let noise = noise_power_w(radar);
    let i_max_w = (noise * (baseline_snr / sinr_required - 1.0)).max(0.0);
    Ok(InterferenceBudget {
        i_max_w,
        inr_db: linear_to_db(i_max_w / noise),
        sinr_required_linear: sinr_required,
        baseline_snr_linear: baseline_snr,
    })
}

/// Permitted INR for each allowed drop in detection probability.
pub fn inr_vs_performance_drop(
    radar: &RadarSystem,
    baseline_snr: f64,
    pd0: f64,
    pfa: f64,
    pd_drop_grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    pd_drop_grid
        .iter()
        .map(|&drop| {
            let roc = RocPoint::new(pd0 - drop, pfa)
                .map_err(|_| Error::domain("inr_vs_performance_drop", format!("P_D0 − drop = {} outside (0, 1)", pd0 - drop)))?;
            let required = snr_required_albersheim(&roc)?;
            let budget = max_tolerable_interference(radar, baseline_snr, required)?;
            Ok((drop, budget.inr_db))
        })
        .collect()
}

/// Interference power from one secondary at the radar receiver.
pub fn received_interference_w(
    su: &SecondaryUser,
    pattern: &AntennaPattern,
    model: &PathLossModel,
    theta_deg: f64,
    distance_m: f64,
    victim_if_bw_hz: f64,
) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::domain("received_interference_w", "distance must be positive"));
    }
    let g = db_to_linear(pattern.gain_dbi(theta_deg)?);
    Ok(su.eirp_w * g * attenuation(model, distance_m) / su.fdr(victim_if_bw_hz)?)
}

/// Smallest separation keeping a single secondary's interference at or below
/// the budget. Returns `f64::INFINITY` when the budget admits no interference.
pub fn protection_distance(
    su: &SecondaryUser,
    pattern: &AntennaPattern,
    model: &PathLossModel,
    budget: &InterferenceBudget,
    theta_deg: f64,
    victim_if_bw_hz: f64,
) -> Result<f64> {
    if !budget.admits_interference() {
        return Ok(f64::INFINITY);
    }
    let fdr = su.fdr(victim_if_bw_hz)?;
    if fdr.is_infinite() {
        return Ok(0.0);
    }
    let g = db_to_linear(pattern.gain_dbi(theta_deg)?);
    invert_attenuation(model, fdr * budget.i_max_w / (su.eirp_w * g))
}

/// The per-azimuth single-secondary distances expressed as a sharing policy.
///
/// Under a power law the distance is `γ·G(θ)^{1/α}`, the same shape as the
/// multi-secondary optimal profile.
pub fn single_user_policy(
    su: &SecondaryUser,
    pattern: &AntennaPattern,
    model: &PathLossModel,
    budget: &InterferenceBudget,
    victim_if_bw_hz: f64,
) -> Result<SharingPolicy> {
    let (_, alpha) = model.power_law_params().ok_or(Error::PowerLawRequired)?;
    if !budget.admits_interference() {
        return Err(Error::domain("single_user_policy", "budget admits no interference"));
    }
    let boresight = protection_distance(su, pattern, model, budget, 0.0, victim_if_bw_hz)?;
    Ok(SharingPolicy::Optimal {
        gamma: boresight / pattern.gain_linear(0.0).powf(1.0 / alpha),
        alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{solve_root, RootBracket};
    use crate::units::watts_to_dbm;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn radar() -> RadarSystem {
        RadarSystem::type_b()
    }

    fn table2_budget() -> InterferenceBudget {
        max_tolerable_interference(&radar(), db_to_linear(13.14), db_to_linear(12.80)).unwrap()
    }

    #[test]
    fn budget_examples() {
        let b = table2_budget();
        assert!((b.inr_db + 10.9).abs() < 0.1, "{}", b.inr_db);
        assert!((watts_to_dbm(b.i_max_w) + 122.6).abs() < 0.5);
        let b = max_tolerable_interference(&radar(), db_to_linear(30.57), db_to_linear(12.80)).unwrap();
        assert!((b.inr_db - 17.7).abs() < 0.05, "{}", b.inr_db);
        let b = max_tolerable_interference(&radar(), 20.0, 20.0).unwrap();
        assert_eq!(b.i_max_w, 0.0);
        assert_eq!(b.inr_db, f64::NEG_INFINITY);
        let b = max_tolerable_interference(&radar(), 10.0, 20.0).unwrap();
        assert_eq!(b.i_max_w, 0.0);
        assert!(max_tolerable_interference(&radar(), 0.0, 20.0).is_err());
    }

    #[test]
    fn inr_drop_examples() {
        let r = radar();
        let at = |baseline_db: f64, drop: f64| {
            inr_vs_performance_drop(&r, db_to_linear(baseline_db), 0.9, 1e-6, &[drop]).unwrap()[0].1
        };
        assert!(at(16.14, 0.0).abs() < 0.05);
        assert!((at(13.14, 0.05) + 10.9).abs() < 0.1);
        let grid: Vec<f64> = (0..=40).map(|k| k as f64 * 0.02).collect();
        let sweep = inr_vs_performance_drop(&r, db_to_linear(20.0), 0.9, 1e-6, &grid).unwrap();
        assert!(sweep.windows(2).all(|w| w[1].1 >= w[0].1));
        assert!(inr_vs_performance_drop(&r, 20.0, 0.9, 1e-6, &[0.95]).is_err());
    }

    #[test]
    fn received_interference_examples() {
        let pattern = AntennaPattern::new(33.5).unwrap();
        let unit = PathLossModel::power_law(1.0, 2.0).unwrap();
        let mut su = SecondaryUser::wifi_ap();
        su.bandwidth_hz = 653e3;
        // G(θ) = 0 dBi somewhere in the far side lobes: use the exact crossing
        let theta0 = 10f64.powf((53.0 - 33.5 / 2.0) / 25.0);
        let i = received_interference_w(&su, &pattern, &unit, theta0, 1.0, 653e3).unwrap();
        assert!((i - su.eirp_w).abs() < 1e-12);
        let i2 = received_interference_w(&su, &pattern, &unit, theta0, 1.0, 653e3 / 2.0).unwrap();
        assert!((i2 - i / 2.0).abs() < 1e-12);
        assert!(received_interference_w(&su, &pattern, &unit, 0.0, 0.0, 653e3).is_err());
    }

    #[test]
    fn boresight_interference_at_table_distance() {
        let pattern = AntennaPattern::new(33.5).unwrap();
        let model = PathLossModel::type_b_fit();
        let b = table2_budget();
        let su = SecondaryUser::wifi_ap();
        let d = protection_distance(&su, &pattern, &model, &b, 0.0, 653e3).unwrap();
        let i = received_interference_w(&su, &pattern, &model, 0.0, d, 653e3).unwrap();
        assert!(((i - b.i_max_w) / b.i_max_w).abs() < 1e-6);
        let i_835 = received_interference_w(&su, &pattern, &model, 0.0, 83.5e3, 653e3).unwrap();
        let excess_db = linear_to_db(i_835 / b.i_max_w);
        assert!(excess_db.abs() < 0.5, "{excess_db}");
    }

    #[test]
    fn side_lobe_distance_and_ratio() {
        let pattern = AntennaPattern::new(33.5).unwrap();
        let model = PathLossModel::type_b_fit();
        let b = table2_budget();
        let su = SecondaryUser::wifi_ap();
        let side = protection_distance(&su, &pattern, &model, &b, 120.0, 653e3).unwrap();
        assert!((7e3..=13e3).contains(&side), "{side}");
        let bore = protection_distance(&su, &pattern, &model, &b, 0.0, 653e3).unwrap();
        let expected = 10f64.powf(39.25 / (10.0 * 3.97));
        assert!((bore / side - expected).abs() < 1e-9);
        assert!((bore / side - 9.7).abs() < 0.1);
    }

    #[test]
    fn distance_matches_bisection_oracle() {
        let pattern = AntennaPattern::new(33.5).unwrap();
        let model = PathLossModel::type_b_fit();
        let b = table2_budget();
        let su = SecondaryUser::wifi_ap();
        for theta in [0.0, 3.0, 5.0, 20.0, 90.0, 180.0] {
            let oracle = solve_root(
                |d: f64| {
                    (received_interference_w(&su, &pattern, &model, theta, d, 653e3).unwrap() / b.i_max_w).ln()
                },
                RootBracket::new(1.0, 1e8).with_tolerance(1e-14),
            )
            .unwrap();
            let d = protection_distance(&su, &pattern, &model, &b, theta, 653e3).unwrap();
            assert!(((d - oracle) / oracle).abs() < 1e-9);
        }
    }

    #[test]
    fn single_user_policy_reproduces_sweep() {
        let pattern = AntennaPattern::new(33.5).unwrap();
        let model = PathLossModel::type_b_fit();
        let b = table2_budget();
        let su = SecondaryUser::wifi_ap();
        let p = single_user_policy(&su, &pattern, &model, &b, 653e3).unwrap();
        for theta in [-170.0, -30.0, -4.5, 0.0, 2.0, 5.0, 60.0] {
            let d = protection_distance(&su, &pattern, &model, &b, theta, 653e3).unwrap();
            assert!(((p.distance_m(&pattern, f64::to_radians(theta)) - d) / d).abs() < 1e-9);
        }
    }

    #[test]
    fn zero_budget_is_infinite_distance() {
        let pattern = AntennaPattern::new(33.5).unwrap();
        let b = max_tolerable_interference(&radar(), 5.0, 5.0).unwrap();
        let d = protection_distance(&SecondaryUser::wifi_ap(), &pattern, &PathLossModel::type_b_fit(), &b, 0.0, 653e3)
            .unwrap();
        assert_eq!(d, f64::INFINITY);
    }

    #[test]
    fn distance_profile_follows_gain_power() {
        let pattern = AntennaPattern::new(33.5).unwrap();
        let model = PathLossModel::type_b_fit();
        let b = table2_budget();
        let su = SecondaryUser::wifi_ap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let (t1, t2) = (rng.random_range(-180.0..180.0), rng.random_range(-180.0..180.0));
            let d1 = protection_distance(&su, &pattern, &model, &b, t1, 653e3).unwrap();
            let d2 = protection_distance(&su, &pattern, &model, &b, t2, 653e3).unwrap();
            let g = db_to_linear(pattern.gain_dbi(t1).unwrap() - pattern.gain_dbi(t2).unwrap());
            assert!(((d1 / d2) / g.powf(1.0 / 3.97) - 1.0).abs() < 1e-9);
            // strictly increasing map gain → distance
            if (d1 - d2).abs() > 0.0 {
                assert_eq!(d1 > d2, g > 1.0);
            }
        }
    }

    #[test]
    fn offset_channel_reduces_interference() {
        let mut su = SecondaryUser::wifi_ap();
        assert!((su.fdr(653e3).unwrap() - 20e6 / 653e3).abs() < 1e-12);
        su.delta_f_hz = 5e6;
        let f = su.fdr(653e3).unwrap();
        assert!(((f - 20e6 / 653e3) / f).abs() < 0.02);
        su.delta_f_hz = 15e6;
        assert_eq!(su.fdr(653e3).unwrap(), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn i_max_monotone(base_db in 10.0f64..40.0, req_db in 5.0f64..14.0, step in 0.01f64..3.0) {
            let r = radar();
            let at = |b: f64, q: f64| max_tolerable_interference(&r, db_to_linear(b), db_to_linear(q)).unwrap().i_max_w;
            prop_assume!(base_db > req_db);
            prop_assert!(at(base_db + step, req_db) > at(base_db, req_db));
            prop_assert!(at(base_db, req_db - step) > at(base_db, req_db));
        }

        #[test]
        fn round_trip_at_protection_distance(theta in -180.0f64..180.0) {
            let pattern = AntennaPattern::new(33.5).unwrap();
            let model = PathLossModel::type_b_fit();
            let b = table2_budget();
            let su = SecondaryUser::wifi_ap();
            let d = protection_distance(&su, &pattern, &model, &b, theta, 653e3).unwrap();
            let i = received_interference_w(&su, &pattern, &model, theta, d, 653e3).unwrap();
            prop_assert!(((i - b.i_max_w) / b.i_max_w).abs() < 1e-6);
        }
    }
}
