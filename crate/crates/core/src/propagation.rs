//! Path loss, the statistical radar antenna pattern and frequency-dependent
//! rejection.

use std::f64::consts::{PI, TAU};
use std::io::Read;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::db_to_linear;

/// Attenuation (inverse path loss) versus distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathLossModel {
    /// `l(r) = k0 · r^(−alpha)`, `r` in meters.
    PowerLaw { k0: f64, alpha: f64 },
    Tabulated(TabulatedPathLoss),
}

/// Sampled attenuation curve, interpolated linearly in log-log space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TabulatedPathLoss {
    points: Vec<(f64, f64)>,
    /// Allow [`invert_attenuation`] to answer outside the sampled range.
    pub extrapolate: bool,
}

impl TabulatedPathLoss {
    pub fn new(points: Vec<(f64, f64)>, extrapolate: bool) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("pathloss.points", "need at least two points"));
        }
        for (i, &(d, l)) in points.iter().enumerate() {
            if !(d > 0.0 && l > 0.0 && d.is_finite() && l.is_finite()) {
                return Err(Error::invalid(
                    format!("pathloss.points[{i}]"),
                    "distance and attenuation must be positive",
                ));
            }
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(Error::invalid(
                    format!("pathloss.points[{}]", i + 1),
                    "distances must be strictly increasing",
                ));
            }
            if w[1].1 >= w[0].1 {
                return Err(Error::invalid(
                    format!("pathloss.points[{}]", i + 1),
                    "attenuation must be strictly decreasing",
                ));
            }
        }
        Ok(TabulatedPathLoss { points, extrapolate })
    }

    /// Read a two-column CSV, either `distance_m,attenuation_db`
    /// (`10·log10 l`, usually negative) or `distance_m,path_loss_db`.
    pub fn from_csv<R: Read>(reader: R, extrapolate: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        let names: Vec<&str> = headers.iter().collect();
        let sign = match names.as_slice() {
            ["distance_m", "attenuation_db"] => 1.0,
            ["distance_m", "path_loss_db"] => -1.0,
            other => {
                return Err(Error::Csv(format!(
                    "expected header `distance_m,attenuation_db` or `distance_m,path_loss_db`, got {other:?}"
                )))
            }
        };
        let mut points = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::Csv(format!("missing column {i}")))?
                    .parse::<f64>()
                    .map_err(|e| Error::Csv(format!("line {:?}: {e}", rec.position().map(|p| p.line()))))
            };
            points.push((parse(0)?, db_to_linear(sign * parse(1)?)));
        }
        Self::new(points, extrapolate)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Segment `(i, i+1)` used for `x`, clamped to the end segments.
    fn segment_for(&self, x: f64, key: impl Fn(&(f64, f64)) -> f64, increasing: bool) -> usize {
        let n = self.points.len();
        let idx = self.points.partition_point(|p| {
            if increasing {
                key(p) < x
            } else {
                key(p) > x
            }
        });
        idx.clamp(1, n - 1) - 1
    }

    fn attenuation(&self, r: f64) -> f64 {
        let i = self.segment_for(r, |p| p.0, true);
        let (r0, l0) = self.points[i];
        let (r1, l1) = self.points[i + 1];
        let slope = (l1 / l0).ln() / (r1 / r0).ln();
        l0 * (r / r0).powf(slope)
    }

    fn invert(&self, target: f64) -> Result<f64> {
        let first = self.points[0];
        let last = self.points[self.points.len() - 1];
        if !self.extrapolate && (target > first.1 || target < last.1) {
            return Err(Error::OutOfRange {
                value: target,
                min: last.1,
                max: first.1,
            });
        }
        let i = self.segment_for(target, |p| p.1, false);
        let (r0, l0) = self.points[i];
        let (r1, l1) = self.points[i + 1];
        let slope = (l1 / l0).ln() / (r1 / r0).ln();
        Ok(r0 * (target / l0).powf(1.0 / slope))
    }
}

impl PathLossModel {
    pub fn power_law(k0: f64, alpha: f64) -> Result<Self> {
        if !(k0 > 0.0 && k0.is_finite()) {
            return Err(Error::invalid("pathloss.k0", "must be positive"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid("pathloss.alpha", "must be positive"));
        }
        Ok(PathLossModel::PowerLaw { k0, alpha })
    }

    /// The line-of-sight power-law fit `259·r^−3.97` used for the Type-B
    /// scenario (2.7–2.9 GHz, 3 m WiFi antenna, 8 m radar antenna).
    pub fn type_b_fit() -> Self {
        PathLossModel::PowerLaw { k0: 259.0, alpha: 3.97 }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            PathLossModel::PowerLaw { k0, alpha } => Self::power_law(*k0, *alpha).map(|_| ()),
            PathLossModel::Tabulated(t) => TabulatedPathLoss::new(t.points.clone(), t.extrapolate).map(|_| ()),
        }
    }

    /// `(k0, α)` for the power-law variant.
    pub fn power_law_params(&self) -> Option<(f64, f64)> {
        match *self {
            PathLossModel::PowerLaw { k0, alpha } => Some((k0, alpha)),
            PathLossModel::Tabulated(_) => None,
        }
    }
}

/// Linear attenuation `l(r)` at `distance_m`.
pub fn attenuation(model: &PathLossModel, distance_m: f64) -> f64 {
    match model {
        PathLossModel::PowerLaw { k0, alpha } => k0 * distance_m.powf(-alpha),
        PathLossModel::Tabulated(t) => t.attenuation(distance_m),
    }
}

/// Distance at which the attenuation equals `attenuation_target`.
pub fn invert_attenuation(model: &PathLossModel, attenuation_target: f64) -> Result<f64> {
    if !(attenuation_target > 0.0) {
        return Err(Error::domain(
            "invert_attenuation",
            format!("target attenuation must be positive, got {attenuation_target}"),
        ));
    }
    match model {
        PathLossModel::PowerLaw { k0, alpha } => Ok((k0 / attenuation_target).powf(1.0 / alpha)),
        PathLossModel::Tabulated(t) => t.invert(attenuation_target),
    }
}

/// Piecewise statistical gain model for high-gain radar antennas.
///
/// ```text
///   G(θ) = Gmax − 4e-4·10^(Gmax/10)·θ²     0  ≤ θ ≤ θM
///          0.75·Gmax − 7                   θM ≤ θ ≤ θR
///          53 − Gmax/2 − 25·log10 θ        θR ≤ θ ≤ θB
///          11 − Gmax/2                     θB ≤ θ ≤ 180
/// ```
/// with θ the absolute azimuth offset in degrees, `θM = 50·√(0.25·Gmax+7)/10^(Gmax/20)`,
/// `θR = 250/10^(Gmax/20)` and `θB = 48`. The published branches do not meet
/// exactly at θR and θB (seams of a few hundredths of a dB for Gmax = 33.5).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AntennaPattern {
    pub gmax_dbi: f64,
    pub theta_m_deg: f64,
    pub theta_r_deg: f64,
    pub theta_b_deg: f64,
}

const THETA_B_DEG: f64 = 48.0;

impl AntennaPattern {
    pub fn new(gmax_dbi: f64) -> Result<Self> {
        if !(gmax_dbi > 22.0 && gmax_dbi < 48.0) {
            return Err(Error::invalid(
                "antenna.gmax_dbi",
                format!("model valid for 22 < Gmax < 48 dBi, got {gmax_dbi}"),
            ));
        }
        let amp = 10f64.powf(gmax_dbi / 20.0);
        let theta_m_deg = 50.0 * (0.25 * gmax_dbi + 7.0).sqrt() / amp;
        let theta_r_deg = 250.0 / amp;
        let p = AntennaPattern {
            gmax_dbi,
            theta_m_deg,
            theta_r_deg,
            theta_b_deg: THETA_B_DEG,
        };
        if !(0.0 < p.theta_m_deg && p.theta_m_deg < p.theta_r_deg && p.theta_r_deg < p.theta_b_deg) {
            return Err(Error::invalid("antenna.gmax_dbi", "branch angles out of order"));
        }
        Ok(p)
    }

    fn curvature(&self) -> f64 {
        4e-4 * 10f64.powf(self.gmax_dbi / 10.0)
    }

    fn plateau_dbi(&self) -> f64 {
        0.75 * self.gmax_dbi - 7.0
    }

    pub fn side_lobe_dbi(&self) -> f64 {
        11.0 - self.gmax_dbi / 2.0
    }

    /// Branch boundaries in |θ| degrees and the branch evaluated at `t`.
    fn branches(&self) -> [(f64, f64); 4] {
        [
            (0.0, self.theta_m_deg),
            (self.theta_m_deg, self.theta_r_deg),
            (self.theta_r_deg, self.theta_b_deg),
            (self.theta_b_deg, 180.0),
        ]
    }

    fn branch_dbi(&self, k: usize, t: f64) -> f64 {
        match k {
            0 => self.gmax_dbi - self.curvature() * t * t,
            1 => self.plateau_dbi(),
            2 => 53.0 - self.gmax_dbi / 2.0 - 25.0 * t.log10(),
            _ => self.side_lobe_dbi(),
        }
    }

    fn gain_dbi_abs(&self, t: f64) -> f64 {
        if t <= self.theta_m_deg {
            self.branch_dbi(0, t)
        } else if t <= self.theta_r_deg {
            self.branch_dbi(1, t)
        } else if t <= self.theta_b_deg {
            self.branch_dbi(2, t)
        } else {
            self.branch_dbi(3, t)
        }
    }

    /// Gain at azimuth offset `theta_deg ∈ [−180, 180]`.
    pub fn gain_dbi(&self, theta_deg: f64) -> Result<f64> {
        if !(-180.0..=180.0).contains(&theta_deg) {
            return Err(Error::domain("gain_dbi", format!("θ = {theta_deg}° outside [−180, 180]")));
        }
        Ok(self.gain_dbi_abs(theta_deg.abs()))
    }

    /// Linear gain at any azimuth in radians (wrapped onto one turn).
    pub fn gain_linear(&self, theta_rad: f64) -> f64 {
        db_to_linear(self.gain_dbi_abs(abs_offset_deg(theta_rad)))
    }

    /// Full width between the −3 dB points of the main lobe, degrees.
    pub fn three_db_beamwidth_deg(&self) -> f64 {
        let half = (3.0 / self.curvature()).sqrt();
        debug_assert!(half <= self.theta_m_deg);
        2.0 * half
    }

    /// Range of |θ| in degrees covered by the angular interval `[a, b]`
    /// (radians, `0 ≤ a ≤ b ≤ 2π`).
    fn abs_range_deg(a: f64, b: f64) -> (f64, f64) {
        if b <= PI {
            (a.to_degrees(), b.to_degrees())
        } else if a >= PI {
            ((TAU - b).to_degrees(), (TAU - a).to_degrees())
        } else {
            (a.min(TAU - b).to_degrees(), 180.0)
        }
    }

    /// Exact maximum of the linear gain over `[a, b] ⊂ [0, 2π]` (radians).
    ///
    /// Every branch is non-increasing in |θ|, so the maximum sits at the left
    /// end of one of the branch pieces overlapping the interval.
    pub fn max_gain_linear_on(&self, a: f64, b: f64) -> f64 {
        let (u, v) = Self::abs_range_deg(a, b);
        let db = self
            .branches()
            .iter()
            .enumerate()
            .filter(|(_, &(lo, hi))| lo <= v && hi >= u)
            .map(|(k, &(lo, _))| self.branch_dbi(k, u.max(lo)))
            .fold(f64::NEG_INFINITY, f64::max);
        db_to_linear(db)
    }

    /// Exact minimum of the linear gain over `[a, b] ⊂ [0, 2π]` (radians).
    pub fn min_gain_linear_on(&self, a: f64, b: f64) -> f64 {
        let (u, v) = Self::abs_range_deg(a, b);
        let db = self
            .branches()
            .iter()
            .enumerate()
            .filter(|(_, &(lo, hi))| lo <= v && hi >= u)
            .map(|(k, &(_, hi))| self.branch_dbi(k, v.min(hi)))
            .fold(f64::INFINITY, f64::min);
        db_to_linear(db)
    }

    /// Angular measure (radians, out of 2π) of `{θ : G(θ) ≤ gain_linear}`.
    pub fn measure_gain_at_most(&self, gain_linear: f64) -> f64 {
        let g = 10.0 * gain_linear.log10();
        let mut deg = 0.0;
        for (k, &(lo, hi)) in self.branches().iter().enumerate() {
            // first |θ| on this branch where the branch value is ≤ g
            let start = match k {
                0 => ((self.gmax_dbi - g).max(0.0) / self.curvature()).sqrt(),
                2 => 10f64.powf((53.0 - self.gmax_dbi / 2.0 - g) / 25.0),
                _ => {
                    if self.branch_dbi(k, lo) <= g {
                        lo
                    } else {
                        hi
                    }
                }
            };
            deg += (hi - start.clamp(lo, hi)).max(0.0);
        }
        (2.0 * deg).to_radians()
    }
}

/// |θ| in degrees for an arbitrary azimuth in radians.
pub(crate) fn abs_offset_deg(theta_rad: f64) -> f64 {
    let mut t = theta_rad.rem_euclid(TAU);
    if t > PI {
        t = TAU - t;
    }
    t.to_degrees()
}

/// Co-channel rejection: `max(B_interferer / B_victim, 1)`.
pub fn fdr_cochannel(interferer_bw_hz: f64, victim_if_bw_hz: f64) -> f64 {
    (interferer_bw_hz / victim_if_bw_hz).max(1.0)
}

/// Frequency-dependent rejection `∫P(f)df / ∫P(f)·H(f+Δf)df`.
///
/// Both integrals use the trapezoid rule on the transmit-spectrum grid; the
/// filter is interpolated linearly and taken as zero outside its samples.
/// Returns `f64::INFINITY` when the filtered power underflows (disjoint
/// spectra).
pub fn fdr_general(tx_psd: &[(f64, f64)], rx_filter: &[(f64, f64)], delta_f_hz: f64) -> Result<f64> {
    if tx_psd.len() < 2 || rx_filter.len() < 2 {
        return Err(Error::domain("fdr_general", "spectra need at least two samples"));
    }
    if tx_psd.windows(2).any(|w| w[1].0 <= w[0].0) || rx_filter.windows(2).any(|w| w[1].0 < w[0].0) {
        return Err(Error::domain("fdr_general", "frequencies must be increasing"));
    }
    if tx_psd.iter().any(|&(_, p)| !(p >= 0.0)) {
        return Err(Error::domain("fdr_general", "PSD must be nonnegative"));
    }
    if rx_filter.iter().any(|&(_, h)| !(0.0..=1.0).contains(&h)) {
        return Err(Error::domain("fdr_general", "filter response must lie in [0, 1]"));
    }
    let response = |f: f64| -> f64 {
        let first = rx_filter[0].0;
        let last = rx_filter[rx_filter.len() - 1].0;
        if f < first || f > last {
            return 0.0;
        }
        let i = rx_filter.partition_point(|p| p.0 <= f).clamp(1, rx_filter.len() - 1);
        let (f0, h0) = rx_filter[i - 1];
        let (f1, h1) = rx_filter[i];
        if f1 == f0 {
            h1
        } else {
            h0 + (h1 - h0) * (f - f0) / (f1 - f0)
        }
    };
    let trapz = |g: &dyn Fn(f64, f64) -> f64| -> f64 {
        tx_psd
            .windows(2)
            .map(|w| 0.5 * (w[1].0 - w[0].0) * (g(w[0].0, w[0].1) + g(w[1].0, w[1].1)))
            .sum()
    };
    let total = trapz(&|_, p| p);
    if !(total > 0.0) {
        return Err(Error::domain("fdr_general", "PSD has zero total power"));
    }
    let passed = trapz(&|f, p| p * response(f + delta_f_hz));
    if passed <= total * f64::MIN_POSITIVE {
        return Ok(f64::INFINITY);
    }
    Ok(total / passed)
}

/// Read a two-column `freq_hz,value` CSV of spectrum samples.
pub fn read_spectrum_csv<R: Read>(reader: R) -> Result<Vec<(f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().collect::<Vec<_>>() != ["freq_hz", "value"] {
        return Err(Error::Csv(format!("expected header `freq_hz,value`, got {headers:?}")));
    }
    rdr.records()
        .map(|rec| {
            let rec = rec?;
            let f = rec.get(0).unwrap_or_default().parse::<f64>();
            let v = rec.get(1).unwrap_or_default().parse::<f64>();
            match (f, v) {
                (Ok(f), Ok(v)) => Ok((f, v)),
                _ => Err(Error::Csv(format!("unparsable row {rec:?}"))),
            }
        })
        .collect()
}

/// Flat power spectral density over `bandwidth_hz` centred on `center_hz`,
/// sampled at `n` points spanning `[center − span/2, center + span/2]`.
pub fn flat_spectrum(center_hz: f64, bandwidth_hz: f64, span_hz: f64, n: usize) -> Vec<(f64, f64)> {
    let n = n.max(2);
    let lo = center_hz - span_hz / 2.0;
    let step = span_hz / (n - 1) as f64;
    (0..n)
        .map(|k| {
            let f = lo + k as f64 * step;
            let inside = (f - center_hz).abs() <= bandwidth_hz / 2.0 * (1.0 + 1e-12);
            (f, if inside { 1.0 } else { 0.0 })
        })
        .collect()
}

/// Ideal band-pass response of width `bandwidth_hz` centred on `center_hz`.
pub fn brick_wall_filter(center_hz: f64, bandwidth_hz: f64) -> Vec<(f64, f64)> {
    let lo = center_hz - bandwidth_hz / 2.0;
    let hi = center_hz + bandwidth_hz / 2.0;
    vec![(lo, 0.0), (lo, 1.0), (hi, 1.0), (hi, 0.0)]
}
