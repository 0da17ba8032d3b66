//! Radar-to-WiFi interference, rate adaptation and scan-averaged throughput.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::propagation::{attenuation, AntennaPattern, PathLossModel};
use crate::protection_multi::SharingPolicy;
use crate::protection_single::SecondaryUser;
use crate::radar::RadarSystem;
use crate::units::{db_to_linear, linear_to_db, thermal_noise_w, T0_KELVIN};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsEntry {
    pub index: u8,
    pub modulation: String,
    pub coding_rate: String,
    pub data_rate_mbps: f64,
    /// Lowest SINR at which this scheme meets its packet-error target.
    pub min_snr_db: f64,
}

/// Rate-adaptation ladder, ordered by increasing SINR threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McsTable {
    entries: Vec<McsEntry>,
}

impl McsTable {
    pub fn new(entries: Vec<McsEntry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::invalid("mcs", "table is empty"));
        }
        for w in entries.windows(2) {
            if w[1].min_snr_db <= w[0].min_snr_db {
                return Err(Error::invalid(format!("mcs[{}].min_snr_db", w[1].index), "must increase with index"));
            }
            if w[1].data_rate_mbps <= w[0].data_rate_mbps {
                return Err(Error::invalid(format!("mcs[{}].data_rate_mbps", w[1].index), "must increase with index"));
            }
        }
        Ok(McsTable { entries })
    }

    /// Single-stream 802.11n, 20 MHz, 800 ns guard interval, 10% PER thresholds.
    pub fn ieee80211n_20mhz() -> Self {
        let rows = [
            ("BPSK", "1/2", 6.5, 4.5),
            ("QPSK", "1/2", 13.0, 6.5),
            ("QPSK", "3/4", 19.5, 8.0),
            ("16-QAM", "1/2", 26.0, 10.5),
            ("16-QAM", "3/4", 39.0, 13.5),
            ("64-QAM", "2/3", 52.0, 17.5),
            ("64-QAM", "3/4", 58.5, 19.5),
            ("64-QAM", "5/6", 65.0, 21.5),
        ];
        let entries = rows
            .iter()
            .enumerate()
            .map(|(i, &(m, r, rate, snr))| McsEntry {
                index: i as u8,
                modulation: m.to_string(),
                coding_rate: r.to_string(),
                data_rate_mbps: rate,
                min_snr_db: snr,
            })
            .collect();
        McsTable { entries }
    }

    pub fn entries(&self) -> &[McsEntry] {
        &self.entries
    }

    pub fn peak_rate_mbps(&self) -> f64 {
        self.entries.last().map_or(0.0, |e| e.data_rate_mbps)
    }
}

/// Highest data rate whose threshold the SINR meets; 0 below the lowest.
pub fn mcs_rate(table: &McsTable, sinr_db: f64) -> f64 {
    table
        .entries
        .iter()
        .rev()
        .find(|e| e.min_snr_db <= sinr_db)
        .map_or(0.0, |e| e.data_rate_mbps)
}

/// An access-point to station link.
///
/// The secondary's `eirp_w` already contains its antenna gain, so the wanted
/// signal is `EIRP / L`; the receive antenna gain is applied only to radar
/// interference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WifiLink {
    pub link_loss_db: f64,
    pub su: SecondaryUser,
    pub rx_noise_figure_db: f64,
    pub rx_bandwidth_hz: f64,
}

impl WifiLink {
    /// 80 dB AP-station loss with the standard secondary user.
    pub fn fixture() -> Self {
        let su = SecondaryUser::wifi_ap();
        WifiLink {
            link_loss_db: 80.0,
            rx_noise_figure_db: su.noise_figure_db,
            rx_bandwidth_hz: su.bandwidth_hz,
            su,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.link_loss_db > 0.0 && self.link_loss_db.is_finite()) {
            return Err(Error::invalid("link.link_loss_db", "must be positive"));
        }
        if !(self.rx_bandwidth_hz > 0.0) {
            return Err(Error::invalid("link.rx_bandwidth_hz", "must be positive"));
        }
        if !self.rx_noise_figure_db.is_finite() {
            return Err(Error::invalid("link.rx_noise_figure_db", "must be finite"));
        }
        self.su.validate()
    }

    pub fn signal_w(&self) -> f64 {
        self.su.eirp_w / db_to_linear(self.link_loss_db)
    }

    pub fn noise_w(&self) -> f64 {
        thermal_noise_w(self.rx_noise_figure_db, T0_KELVIN, self.rx_bandwidth_hz)
    }

    pub fn snr_db(&self) -> f64 {
        linear_to_db(self.signal_w() / self.noise_w())
    }
}

/// How radar pulses are converted to an interference level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterferenceMode {
    /// Pulse peak power.
    Peak,
    /// Peak scaled by the duty cycle, for a receiver whose interleaver
    /// spreads each pulse over many symbols.
    Averaged,
}

/// Radar power received by a secondary at `distance_m`, with the radar beam
/// `theta_deg` away from the secondary's bearing.
pub fn radar_interference_w(
    radar: &RadarSystem,
    pattern: &AntennaPattern,
    model: &PathLossModel,
    su: &SecondaryUser,
    distance_m: f64,
    theta_deg: f64,
    mode: InterferenceMode,
) -> f64 {
    let peak = radar.tx_power_w
        * su.antenna_gain_linear()
        * pattern.gain_linear(theta_deg.to_radians())
        * attenuation(model, distance_m);
    match mode {
        InterferenceMode::Peak => peak,
        InterferenceMode::Averaged => peak * radar.duty_cycle(),
    }
}

/// `S / (N + I)` at the station (linear).
pub fn wifi_sinr(link: &WifiLink, radar_interference_w: f64) -> f64 {
    link.signal_w() / (link.noise_w() + radar_interference_w)
}

/// Fraction of the scan during which a secondary at `distance_m` may transmit.
pub fn duty_factor(policy: &SharingPolicy, pattern: &AntennaPattern, distance_m: f64) -> f64 {
    match *policy {
        SharingPolicy::RadarBlind { d_min_m } => {
            if distance_m >= d_min_m {
                1.0
            } else {
                0.0
            }
        }
        SharingPolicy::MainSideLobe {
            d_min_m,
            d_max_m,
            lobe_width_rad,
            ..
        } => {
            if distance_m < d_min_m {
                0.0
            } else if distance_m < d_max_m {
                1.0 - lobe_width_rad / TAU
            } else {
                1.0
            }
        }
        SharingPolicy::Optimal { gamma, alpha } => {
            let g_allowed = (distance_m / gamma).powf(alpha);
            (pattern.measure_gain_at_most(g_allowed) / TAU).clamp(0.0, 1.0)
        }
    }
}

/// Everything that stays fixed while sweeping time or distance.
#[derive(Debug, Clone, Copy)]
pub struct LinkScenario<'a> {
    pub link: &'a WifiLink,
    pub radar: &'a RadarSystem,
    pub pattern: &'a AntennaPattern,
    pub model: &'a PathLossModel,
    pub table: &'a McsTable,
    pub mode: InterferenceMode,
}

/// One time step of a throughput trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub time_s: f64,
    /// Radar beam direction relative to the secondary's bearing, `[0, 360)`.
    pub azimuth_deg: f64,
    pub sinr_db: f64,
    /// Zero while the policy forbids transmission.
    pub rate_mbps: f64,
    pub permitted: bool,
}

impl LinkScenario<'_> {
    /// State at `time_s` with the beam on the secondary at `t = 0`.
    /// `policy = None` means transmission is always permitted.
    pub fn at_time(&self, policy: Option<&SharingPolicy>, distance_m: f64, time_s: f64) -> TracePoint {
        let period = self.radar.scan_time_s;
        let azimuth_deg = (time_s / period).rem_euclid(1.0) * 360.0;
        let i = radar_interference_w(
            self.radar,
            self.pattern,
            self.model,
            &self.link.su,
            distance_m,
            azimuth_deg,
            self.mode,
        );
        let sinr_db = linear_to_db(wifi_sinr(self.link, i));
        let permitted = policy.is_none_or(|p| distance_m >= p.distance_m(self.pattern, azimuth_deg.to_radians()));
        TracePoint {
            time_s,
            azimuth_deg,
            sinr_db,
            rate_mbps: if permitted { mcs_rate(self.table, sinr_db) } else { 0.0 },
            permitted,
        }
    }
}

/// One scan period sampled at `n_time_steps` uniform instants.
pub fn throughput_vs_time(
    scenario: &LinkScenario<'_>,
    policy: Option<&SharingPolicy>,
    distance_m: f64,
    n_time_steps: usize,
) -> Result<Vec<TracePoint>> {
    if n_time_steps < 8 {
        return Err(Error::invalid("n_time_steps", "need at least 8 steps per scan"));
    }
    if !(distance_m > 0.0) {
        return Err(Error::domain("throughput_vs_time", "distance must be positive"));
    }
    let dt = scenario.radar.scan_time_s / n_time_steps as f64;
    Ok((0..n_time_steps)
        .map(|k| scenario.at_time(policy, distance_m, k as f64 * dt))
        .collect())
}

/// Scan-averaged data rate.
pub fn average_throughput(
    scenario: &LinkScenario<'_>,
    policy: Option<&SharingPolicy>,
    distance_m: f64,
    n_time_steps: usize,
) -> Result<f64> {
    let trace = throughput_vs_time(scenario, policy, distance_m, n_time_steps)?;
    Ok(trace.iter().map(|p| p.rate_mbps).sum::<f64>() / trace.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protection_single::{max_tolerable_interference, single_user_policy};
    use crate::radar::{snr_required_albersheim, RocPoint};
    use crate::units::watts_to_dbm;
    use proptest::prelude::*;

    struct Fixture {
        link: WifiLink,
        radar: RadarSystem,
        pattern: AntennaPattern,
        model: PathLossModel,
        table: McsTable,
    }

    impl Fixture {
        fn new() -> Self {
            Fixture {
                link: WifiLink::fixture(),
                radar: RadarSystem::type_b(),
                pattern: AntennaPattern::new(33.5).unwrap(),
                model: PathLossModel::type_b_fit(),
                table: McsTable::ieee80211n_20mhz(),
            }
        }

        fn scenario(&self, mode: InterferenceMode) -> LinkScenario<'_> {
            LinkScenario {
                link: &self.link,
                radar: &self.radar,
                pattern: &self.pattern,
                model: &self.model,
                table: &self.table,
                mode,
            }
        }

        /// Single-secondary profile at 10 dB radar margin and a 5% P_D drop.
        fn single_user_policy(&self) -> SharingPolicy {
            let req = snr_required_albersheim(&RocPoint::new(0.85, 1e-6).unwrap()).unwrap();
            let budget = max_tolerable_interference(&self.radar, db_to_linear(23.14), req).unwrap();
            single_user_policy(&self.link.su, &self.pattern, &self.model, &budget, 653e3).unwrap()
        }
    }

    #[test]
    fn mcs_rows() {
        let t = McsTable::ieee80211n_20mhz();
        for e in t.entries() {
            assert_eq!(mcs_rate(&t, e.min_snr_db), e.data_rate_mbps);
            assert!(mcs_rate(&t, e.min_snr_db - 1e-9) < e.data_rate_mbps);
        }
        assert_eq!(mcs_rate(&t, 21.5), 65.0);
        assert_eq!(mcs_rate(&t, 4.4), 0.0);
        assert_eq!(mcs_rate(&t, 10.5), 26.0);
        assert_eq!(t.entries().len(), 8);
        assert!(McsTable::new(vec![]).is_err());
    }

    #[test]
    fn mcs_rejects_unsorted() {
        let mut rows = McsTable::ieee80211n_20mhz().entries().to_vec();
        rows.swap(2, 3);
        assert!(McsTable::new(rows).is_err());
    }

    #[test]
    fn link_budget() {
        let l = WifiLink::fixture();
        assert!((watts_to_dbm(l.signal_w()) + 50.0).abs() < 1e-9);
        assert!((watts_to_dbm(l.noise_w()) + 93.0).abs() < 0.1);
        assert!((l.snr_db() - 43.0).abs() < 1.0);
        let n = l.noise_w();
        assert!((linear_to_db(wifi_sinr(&l, n)) - (l.snr_db() - 10.0 * 2f64.log10())).abs() < 1e-12);
        assert!(wifi_sinr(&l, 1e30) < 1e-20);
    }

    #[test]
    fn interference_modes() {
        let f = Fixture::new();
        let su = &f.link.su;
        let p = radar_interference_w(&f.radar, &f.pattern, &f.model, su, 1e4, 0.0, InterferenceMode::Peak);
        let a = radar_interference_w(&f.radar, &f.pattern, &f.model, su, 1e4, 0.0, InterferenceMode::Averaged);
        let mut r = f.radar.clone();
        r.pulse_width_s = 1e-6;
        r.prf_hz = 1.0 / 896e-6;
        let ratio = linear_to_db(
            radar_interference_w(&r, &f.pattern, &f.model, su, 1e4, 0.0, InterferenceMode::Averaged)
                / radar_interference_w(&r, &f.pattern, &f.model, su, 1e4, 0.0, InterferenceMode::Peak),
        );
        assert!((ratio + 29.5).abs() < 0.1, "{ratio}");
        assert!((a / p - f.radar.duty_cycle()).abs() < 1e-15);

        let back = radar_interference_w(&f.radar, &f.pattern, &f.model, su, 1e4, 150.0, InterferenceMode::Peak);
        assert!((linear_to_db(p / back) - (33.5 - (11.0 - 33.5 / 2.0))).abs() < 1e-9);
        let far = radar_interference_w(&f.radar, &f.pattern, &f.model, su, 2e4, 0.0, InterferenceMode::Peak);
        assert!((linear_to_db(p / far) - 3.97 * linear_to_db(2.0)).abs() < 1e-9);
    }

    #[test]
    fn duty_factor_examples() {
        let f = Fixture::new();
        let rb = SharingPolicy::RadarBlind { d_min_m: 1e5 };
        assert_eq!(duty_factor(&rb, &f.pattern, 5e4), 0.0);
        assert_eq!(duty_factor(&rb, &f.pattern, 2e5), 1.0);
        let ms = SharingPolicy::MainSideLobe {
            d_min_m: 1e5,
            d_max_m: 4e5,
            beta: 4.0,
            lobe_width_rad: 3.7f64.to_radians(),
        };
        assert!((duty_factor(&ms, &f.pattern, 2e5) - (1.0 - 3.7 / 360.0)).abs() < 1e-12);
        assert!((duty_factor(&ms, &f.pattern, 2e5) - 0.9897).abs() < 1e-4);
        assert_eq!(duty_factor(&ms, &f.pattern, 4e5), 1.0);
        let opt = f.single_user_policy();
        let bore = opt.distance_m(&f.pattern, 0.0);
        assert_eq!(duty_factor(&opt, &f.pattern, bore), 1.0);
        let side = opt.distance_m(&f.pattern, std::f64::consts::PI);
        assert_eq!(duty_factor(&opt, &f.pattern, side * 0.99), 0.0);
    }

    #[test]
    fn duty_factor_matches_trace_fraction() {
        let f = Fixture::new();
        let opt = f.single_user_policy();
        let s = f.scenario(InterferenceMode::Averaged);
        for d in [3e3, 8e3, 15e3, 22e3] {
            let trace = throughput_vs_time(&s, Some(&opt), d, 200_000).unwrap();
            let frac = trace.iter().filter(|p| p.permitted).count() as f64 / trace.len() as f64;
            assert!((frac - duty_factor(&opt, &f.pattern, d)).abs() < 1e-4, "d = {d}");
        }
    }

    #[test]
    fn far_secondary_runs_at_peak_rate() {
        let f = Fixture::new();
        let s = f.scenario(InterferenceMode::Peak);
        let trace = throughput_vs_time(&s, None, 5e6, 720).unwrap();
        assert!(trace.iter().all(|p| p.rate_mbps == 65.0));
        assert_eq!(average_throughput(&s, None, 5e6, 720).unwrap(), 65.0);
    }

    #[test]
    fn gated_while_inside_ring() {
        let f = Fixture::new();
        let opt = f.single_user_policy();
        let s = f.scenario(InterferenceMode::Averaged);
        let d = 0.5 * opt.distance_m(&f.pattern, 0.0);
        let trace = throughput_vs_time(&s, Some(&opt), d, 3600).unwrap();
        assert!(trace.iter().any(|p| !p.permitted));
        assert!(trace.iter().filter(|p| !p.permitted).all(|p| p.rate_mbps == 0.0));
        assert!(!trace[0].permitted);
    }

    #[test]
    fn peak_mode_is_dead_at_twelve_km() {
        let f = Fixture::new();
        let opt = f.single_user_policy();
        let side = opt.distance_m(&f.pattern, std::f64::consts::PI);
        assert!(side < 4e3, "{side}");
        let peak = f.scenario(InterferenceMode::Peak);
        let trace = throughput_vs_time(&peak, Some(&opt), 12e3, 3600).unwrap();
        assert!(trace.iter().all(|p| p.rate_mbps == 0.0));
        assert!(trace.iter().any(|p| p.permitted));
        let avg = f.scenario(InterferenceMode::Averaged);
        assert!(average_throughput(&avg, Some(&opt), 12e3, 3600).unwrap() > 0.0);
    }

    #[test]
    fn average_is_trace_mean_and_modes_ordered() {
        let f = Fixture::new();
        let opt = f.single_user_policy();
        let (peak, avg) = (f.scenario(InterferenceMode::Peak), f.scenario(InterferenceMode::Averaged));
        for d in [2e3, 5e3, 2e4, 1e5, 4e5] {
            let trace = throughput_vs_time(&avg, Some(&opt), d, 1000).unwrap();
            let mean = trace.iter().map(|p| p.rate_mbps).sum::<f64>() / 1000.0;
            assert!((average_throughput(&avg, Some(&opt), d, 1000).unwrap() - mean).abs() < 1e-9);
            assert!(
                average_throughput(&avg, Some(&opt), d, 1000).unwrap()
                    >= average_throughput(&peak, Some(&opt), d, 1000).unwrap()
            );
        }
    }

    #[test]
    fn trace_errors() {
        let f = Fixture::new();
        let s = f.scenario(InterferenceMode::Peak);
        assert!(throughput_vs_time(&s, None, 1e4, 7).is_err());
        assert!(throughput_vs_time(&s, None, 0.0, 100).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn mcs_is_step_function(a in -10.0f64..40.0, b in -10.0f64..40.0) {
            let t = McsTable::ieee80211n_20mhz();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(mcs_rate(&t, lo) <= mcs_rate(&t, hi));
            let r = mcs_rate(&t, a);
            prop_assert!(r == 0.0 || t.entries().iter().any(|e| e.data_rate_mbps == r));
        }

        #[test]
        fn duty_factor_non_decreasing(d in 100.0f64..1e6, step in 1.0f64..2.0) {
            let f = Fixture::new();
            let policies = [
                f.single_user_policy(),
                SharingPolicy::RadarBlind { d_min_m: 5e4 },
                SharingPolicy::MainSideLobe { d_min_m: 2e4, d_max_m: 1e5, beta: 5.0, lobe_width_rad: 0.1 },
            ];
            for p in &policies {
                prop_assert!(duty_factor(p, &f.pattern, d * step) >= duty_factor(p, &f.pattern, d));
            }
        }

        #[test]
        fn trace_periodic_in_time(t in 0.0f64..4.8, d in 1e3f64..1e6) {
            let f = Fixture::new();
            let opt = f.single_user_policy();
            let s = f.scenario(InterferenceMode::Peak);
            let a = s.at_time(Some(&opt), d, t);
            let b = s.at_time(Some(&opt), d, t + 3.0 * f.radar.scan_time_s);
            prop_assert!((a.azimuth_deg - b.azimuth_deg).abs() < 1e-9 || (a.azimuth_deg - b.azimuth_deg).abs() > 359.999);
            prop_assert!((a.sinr_db - b.sinr_db).abs() < 1e-6);
        }
    }
}
