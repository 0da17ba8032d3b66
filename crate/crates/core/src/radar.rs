//! Noise-limited detection budget of a rotating search radar.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, thermal_noise_w, SPEED_OF_LIGHT};

/// Transmitter, antenna and receiver parameters of a search radar.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadarSystem {
    pub tx_power_w: f64,
    pub wavelength_m: f64,
    /// Boresight gain.
    pub peak_gain_dbi: f64,
    pub prf_hz: f64,
    pub pulse_width_s: f64,
    /// IF (detection) bandwidth.
    pub if_bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub ambient_temp_k: f64,
    /// Time for one full antenna revolution.
    pub scan_time_s: f64,
    pub scan_solid_angle_sr: f64,
    pub az_beamwidth_rad: f64,
    pub el_beamwidth_rad: f64,
    pub system_loss_db: f64,
    pub antenna_efficiency: f64,
    pub antenna_height_m: f64,
}

impl RadarSystem {
    /// ITU-R M.1464-1 "Type B" ground ATC radar at 2.8 GHz.
    ///
    /// Scan time follows from a 75°/s, 360° azimuth scan. The scanned solid
    /// angle uses the fan-beam form `2π·θ_V`; system loss of 2 dB and the
    /// lower PRF bound are assumptions (the source lists neither).
    pub fn type_b() -> Self {
        let el_beamwidth_rad = 4.8f64.to_radians();
        RadarSystem {
            tx_power_w: 1.32e6,
            wavelength_m: SPEED_OF_LIGHT / 2.8e9,
            peak_gain_dbi: 33.5,
            prf_hz: 1059.0,
            pulse_width_s: 1.03e-6,
            if_bandwidth_hz: 653e3,
            noise_figure_db: 4.0,
            ambient_temp_k: 290.0,
            scan_time_s: 360.0 / 75.0,
            scan_solid_angle_sr: 2.0 * PI * el_beamwidth_rad,
            az_beamwidth_rad: 1.3f64.to_radians(),
            el_beamwidth_rad,
            system_loss_db: 2.0,
            antenna_efficiency: 0.5,
            antenna_height_m: 8.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tx_power_w", self.tx_power_w),
            ("wavelength_m", self.wavelength_m),
            ("prf_hz", self.prf_hz),
            ("pulse_width_s", self.pulse_width_s),
            ("if_bandwidth_hz", self.if_bandwidth_hz),
            ("ambient_temp_k", self.ambient_temp_k),
            ("scan_time_s", self.scan_time_s),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        for (name, v) in [
            ("az_beamwidth_rad", self.az_beamwidth_rad),
            ("el_beamwidth_rad", self.el_beamwidth_rad),
        ] {
            if !(v > 0.0 && v < 2.0 * PI) {
                return Err(Error::invalid(name, format!("must lie in (0, 2π), got {v}")));
            }
        }
        if !(self.scan_solid_angle_sr > 0.0 && self.scan_solid_angle_sr <= 4.0 * PI) {
            return Err(Error::invalid(
                "scan_solid_angle_sr",
                format!("must lie in (0, 4π], got {}", self.scan_solid_angle_sr),
            ));
        }
        if !(self.antenna_efficiency > 0.0 && self.antenna_efficiency <= 1.0) {
            return Err(Error::invalid("antenna_efficiency", "must lie in (0, 1]"));
        }
        if self.duty_cycle() >= 1.0 {
            return Err(Error::invalid(
                "pulse_width_s",
                format!("duty cycle {} must be below 1", self.duty_cycle()),
            ));
        }
        for (name, v) in [
            ("peak_gain_dbi", self.peak_gain_dbi),
            ("noise_figure_db", self.noise_figure_db),
            ("system_loss_db", self.system_loss_db),
            ("antenna_height_m", self.antenna_height_m),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    pub fn peak_gain_linear(&self) -> f64 {
        db_to_linear(self.peak_gain_dbi)
    }

    pub fn system_loss_linear(&self) -> f64 {
        db_to_linear(self.system_loss_db)
    }

    /// Fraction of time the transmitter is on, `PW·f_R`.
    pub fn duty_cycle(&self) -> f64 {
        self.pulse_width_s * self.prf_hz
    }

    /// Pulses integrated per dwell, `M = T_I·f_R` with `T_I = T_S·4πρ_A/(Ω·G)`.
    pub fn integrated_pulses(&self) -> f64 {
        let dwell = self.scan_time_s * 4.0 * PI * self.antenna_efficiency
            / (self.scan_solid_angle_sr * self.peak_gain_linear());
        dwell * self.prf_hz
    }
}

/// A point target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub range_m: f64,
    pub rcs_m2: f64,
}

impl Target {
    pub fn new(range_m: f64, rcs_m2: f64) -> Result<Self> {
        if !(range_m > 0.0) {
            return Err(Error::invalid("range_m", "must be positive"));
        }
        if !(rcs_m2 > 0.0) {
            return Err(Error::invalid("rcs_m2", "must be positive"));
        }
        Ok(Target { range_m, rcs_m2 })
    }
}

/// An operating point on the receiver operating characteristic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub pd: f64,
    pub pfa: f64,
}

impl RocPoint {
    pub fn new(pd: f64, pfa: f64) -> Result<Self> {
        if !(pd > 0.0 && pd < 1.0) {
            return Err(Error::invalid("pd", format!("must lie in (0, 1), got {pd}")));
        }
        if !(pfa > 0.0 && pfa < 1.0) {
            return Err(Error::invalid("pfa", format!("must lie in (0, 1), got {pfa}")));
        }
        Ok(RocPoint { pd, pfa })
    }

    /// `(ln(0.62/P_FA), ln(P_D/(1−P_D)))`, rejecting `P_FA > 0.62`.
    fn log_terms(&self, op: &'static str) -> Result<(f64, f64)> {
        if !(self.pfa > 0.0 && self.pfa <= 0.62) {
            return Err(Error::domain(op, format!("P_FA = {} must lie in (0, 0.62]", self.pfa)));
        }
        if !(self.pd > 0.0 && self.pd < 1.0) {
            return Err(Error::domain(op, format!("P_D = {} must lie in (0, 1)", self.pd)));
        }
        Ok(((0.62 / self.pfa).ln(), (self.pd / (1.0 - self.pd)).ln()))
    }
}

/// Receiver noise power `F·k·T_E·f_BW`, watts.
pub fn noise_power_w(radar: &RadarSystem) -> f64 {
    thermal_noise_w(radar.noise_figure_db, radar.ambient_temp_k, radar.if_bandwidth_hz)
}

/// Single-pulse SNR from the monostatic radar equation (linear).
pub fn single_pulse_snr(radar: &RadarSystem, target: &Target) -> f64 {
    let g = radar.peak_gain_linear();
    radar.tx_power_w * g * g * radar.wavelength_m.powi(2) * target.rcs_m2
        / ((4.0 * PI).powi(3) * target.range_m.powi(4) * noise_power_w(radar))
}

/// Received power per unit `σ/d⁴` after coherent integration over a dwell,
/// divided by noise; multiply by `σ/d⁴` to get the effective SNR.
fn effective_snr_coefficient(radar: &RadarSystem) -> f64 {
    (radar.scan_time_s / radar.scan_solid_angle_sr)
        * radar.tx_power_w
        * radar.peak_gain_linear()
        * radar.wavelength_m.powi(2)
        * radar.prf_hz
        / ((4.0 * PI).powi(2) * noise_power_w(radar) * radar.system_loss_linear())
}

/// Effective SNR at the detector after coherent integration of all pulses in
/// one dwell (linear).
pub fn effective_snr(radar: &RadarSystem, target: &Target) -> f64 {
    effective_snr_coefficient(radar) * target.rcs_m2 / target.range_m.powi(4)
}

/// Single-pulse false-alarm probability for a threshold `V_T/β`.
pub fn pfa_from_threshold(vt_over_beta: f64) -> f64 {
    (-0.5 * vt_over_beta * vt_over_beta).exp()
}

/// High-SNR Gaussian approximation of the detection probability.
pub fn pd_high_snr(vt_over_beta: f64, snr_p: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(vt_over_beta / std::f64::consts::SQRT_2 - snr_p.sqrt())
}

/// Albersheim's empirical SNR requirement for a ROC point (linear).
pub fn snr_required_albersheim(roc: &RocPoint) -> Result<f64> {
    let (a, b) = roc.log_terms("snr_required_albersheim")?;
    Ok(a + 0.12 * a * b + 1.7 * b)
}

/// Per-pulse SNR (dB) needed when `m` pulses are combined non-coherently
/// after a linear envelope detector.
pub fn snr_required_noncoherent(roc: &RocPoint, m: u32) -> Result<f64> {
    if m == 0 {
        return Err(Error::domain("snr_required_noncoherent", "pulse count must be ≥ 1"));
    }
    let (a, b) = roc.log_terms("snr_required_noncoherent")?;
    let m = m as f64;
    Ok(-5.0 * m.log10() + (6.2 + 4.54 / (m + 0.44).sqrt()) * (a + 0.12 * a * b + 1.7 * b).log10())
}

/// Range at which [`effective_snr`] equals the Albersheim requirement.
pub fn max_range(radar: &RadarSystem, roc: &RocPoint, rcs_m2: f64) -> Result<f64> {
    let required = snr_required_albersheim(roc)?;
    if !(required > 0.0) {
        return Err(Error::domain("max_range", "required SNR must be positive"));
    }
    Ok((effective_snr_coefficient(radar) * rcs_m2 / required).powf(0.25))
}

/// Target pushed out to the range where the radar is exactly at its required
/// SNR for `roc`; the interference-free baseline is then the requirement itself.
pub fn normalized_target(radar: &RadarSystem, roc: &RocPoint, rcs_m2: f64) -> Result<Target> {
    Target::new(max_range(radar, roc, rcs_m2)?, rcs_m2)
}
