//! Scenario file: strict JSON in human units, converted to library types.

use std::f64::consts::PI;
use std::fs::File;
use std::path::{Path, PathBuf};

use coexist_core::propagation::{AntennaPattern, PathLossModel, TabulatedPathLoss};
use coexist_core::protection_multi::DeploymentField;
use coexist_core::protection_single::SecondaryUser;
use coexist_core::radar::{RadarSystem, RocPoint};
use coexist_core::units::{dbm_to_watts, SPEED_OF_LIGHT};
use coexist_core::wifi::WifiLink;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub version: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
    pub radar: Option<RadarConfig>,
    pub roc: Option<RocConfig>,
    pub su: Option<SuConfig>,
    pub pathloss: Option<PathLossConfig>,
    pub field: Option<FieldConfig>,
    #[serde(default)]
    pub policy: PolicyConfig,
    pub link: Option<LinkConfig>,
    #[serde(default)]
    pub sweeps: SweepConfig,
    #[serde(default)]
    pub mc: McConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarConfig {
    pub tx_power_w: f64,
    pub frequency_hz: f64,
    pub peak_gain_dbi: f64,
    pub prf_hz: f64,
    pub pulse_width_s: f64,
    pub if_bandwidth_hz: f64,
    pub noise_figure_db: f64,
    #[serde(default = "default_temp")]
    pub ambient_temp_k: f64,
    pub scan_rate_deg_per_s: f64,
    pub az_beamwidth_deg: f64,
    pub el_beamwidth_deg: f64,
    /// Defaults to a full-azimuth fan beam, `2π·θ_el`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan_solid_angle_sr: Option<f64>,
    #[serde(default)]
    pub system_loss_db: f64,
    #[serde(default = "default_efficiency")]
    pub antenna_efficiency: f64,
    pub antenna_height_m: f64,
}

fn default_temp() -> f64 {
    290.0
}

fn default_efficiency() -> f64 {
    0.5
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RocPointConfig {
    pub pd: f64,
    pub pfa: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RocConfig {
    pub baseline: RocPointConfig,
    pub degraded: RocPointConfig,
    /// Operating SNR; defaults to the SNR that just meets `baseline`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_snr_db: Option<f64>,
    #[serde(default = "default_rcs")]
    pub target_rcs_m2: f64,
}

fn default_rcs() -> f64 {
    1.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuConfig {
    pub eirp_dbm: f64,
    pub bandwidth_hz: f64,
    pub antenna_gain_dbi: f64,
    pub antenna_height_m: f64,
    pub noise_figure_db: f64,
    #[serde(default)]
    pub delta_f_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathLossConfig {
    PowerLaw {
        k0: f64,
        alpha: f64,
    },
    /// CSV with `distance_m,attenuation_db` or `distance_m,path_loss_db`;
    /// relative paths resolve against the config file.
    Tabulated {
        csv: PathBuf,
        #[serde(default = "yes")]
        extrapolate: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        fit_range_m: Option<[f64; 2]>,
    },
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    pub density_per_m2: f64,
    #[serde(default = "one")]
    pub activity_prob: f64,
    pub outage_max: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    Optimal,
    RadarBlind,
    MainSide,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolicyConfig {
    #[serde(default = "default_kind")]
    pub kind: PolicyKind,
    /// Main-lobe sector width; defaults to twice the pattern's side-lobe edge.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lobe_width_deg: Option<f64>,
    /// Fixed main/side ratio; optimised over `beta_grid` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default = "default_beta_grid")]
    pub beta_grid: Grid,
    #[serde(default = "default_azimuths")]
    pub n_azimuths: usize,
}

fn default_kind() -> PolicyKind {
    PolicyKind::Optimal
}

fn default_beta_grid() -> Grid {
    Grid::linear(1.0, 11.0, 101)
}

fn default_azimuths() -> usize {
    3600
}

impl Default for PolicyConfig {
    fn default() -> Self {
        PolicyConfig {
            kind: default_kind(),
            lobe_width_deg: None,
            beta: None,
            beta_grid: default_beta_grid(),
            n_azimuths: default_azimuths(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LinkPolicy {
    /// Transmit only outside the single-secondary protection profile.
    SingleUser,
    /// Transmit unconditionally.
    None,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkConfig {
    pub link_loss_db: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_noise_figure_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rx_bandwidth_hz: Option<f64>,
    #[serde(default = "default_link_policy")]
    pub policy: LinkPolicy,
    #[serde(default = "default_time_steps")]
    pub time_steps: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_distance_m: Option<f64>,
}

fn default_link_policy() -> LinkPolicy {
    LinkPolicy::SingleUser
}

fn default_time_steps() -> usize {
    3600
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Log,
}

/// Explicit values, or `n` points from `start` to `stop` inclusive.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

impl Grid {
    pub fn linear(start: f64, stop: f64, n: usize) -> Self {
        Grid {
            values: None,
            start: Some(start),
            stop: Some(stop),
            n: Some(n),
            spacing: Spacing::Linear,
        }
    }

    pub fn log(start: f64, stop: f64, n: usize) -> Self {
        Grid {
            spacing: Spacing::Log,
            ..Grid::linear(start, stop, n)
        }
    }

    /// Expanded points; non-empty, finite and strictly increasing.
    pub fn points(&self, path: &str) -> CliResult<Vec<f64>> {
        let pts = match (&self.values, self.start, self.stop, self.n) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                if n == 0 {
                    return Err(CliError::invalid(format!("{path}.n"), "must be at least 1"));
                }
                if self.spacing == Spacing::Log && !(a > 0.0 && b > 0.0) {
                    return Err(CliError::invalid(path, "log spacing needs positive start and stop"));
                }
                let step = |k: usize| if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
                (0..n)
                    .map(|k| match self.spacing {
                        _ if k == 0 => a,
                        _ if k == n - 1 => b,
                        Spacing::Linear => a + (b - a) * step(k),
                        Spacing::Log => (a.ln() + (b.ln() - a.ln()) * step(k)).exp(),
                    })
                    .collect()
            }
            _ => {
                return Err(CliError::invalid(path, "give either `values` or all of `start`, `stop`, `n`"));
            }
        };
        if pts.is_empty() {
            return Err(CliError::invalid(path, "grid is empty"));
        }
        if pts.iter().any(|v| !v.is_finite()) {
            return Err(CliError::invalid(path, "grid values must be finite"));
        }
        if pts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(CliError::invalid(path, "grid must be strictly increasing"));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_theta")]
    pub theta_deg: Grid,
    #[serde(default = "default_distance")]
    pub distance_m: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density_per_m2: Option<Grid>,
    #[serde(default = "default_pd_drop")]
    pub pd_drop: Grid,
    #[serde(default = "default_pd")]
    pub pd: Grid,
}

fn default_theta() -> Grid {
    Grid::linear(-180.0, 180.0, 3601)
}

fn default_distance() -> Grid {
    Grid::log(500.0, 2e6, 121)
}

fn default_pd_drop() -> Grid {
    Grid::linear(0.01, 0.2, 20)
}

fn default_pd() -> Grid {
    Grid::linear(0.5, 0.99, 50)
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            theta_deg: default_theta(),
            distance_m: default_distance(),
            density_per_m2: None,
            pd_drop: default_pd_drop(),
            pd: default_pd(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McMethod {
    /// Strong transmitters drawn explicitly, the weak remainder as a Gaussian.
    Hybrid,
    /// Every transmitter drawn inside `outer_radius_factor` × the largest distance.
    Direct,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default = "default_method")]
    pub method: McMethod,
    #[serde(default = "default_strong_fraction")]
    pub strong_fraction: f64,
    #[serde(default = "default_outer_factor")]
    pub outer_radius_factor: f64,
}

fn default_seed() -> u64 {
    42
}

fn default_samples() -> usize {
    10_000
}

fn default_method() -> McMethod {
    McMethod::Hybrid
}

fn default_strong_fraction() -> f64 {
    0.007
}

fn default_outer_factor() -> f64 {
    100.0
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            seed: default_seed(),
            samples: default_samples(),
            method: default_method(),
            strong_fraction: default_strong_fraction(),
            outer_radius_factor: default_outer_factor(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_format")]
    pub format: Format,
}

fn default_format() -> Format {
    Format::Csv
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { format: default_format() }
    }
}

/// Parse and check a scenario file; every present section is validated.
pub fn load(path: &Path) -> CliResult<(Config, PathBuf)> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let config: Config = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let at = e.path().to_string();
        if at == "." {
            CliError::Parse(e.into_inner().to_string())
        } else {
            CliError::Parse(format!("{at}: {}", e.into_inner()))
        }
    })?;
    de.end().map_err(|e| CliError::Parse(e.to_string()))?;
    if config.version != SCHEMA_VERSION {
        return Err(CliError::invalid(
            "version",
            format!("unsupported schema version {}, expected {SCHEMA_VERSION}", config.version),
        ));
    }
    let base = path.parent().map_or_else(PathBuf::new, Path::to_path_buf);
    config.validate(&base)?;
    Ok((config, base))
}

fn finite(path: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(path, "must be finite"))
    }
}

fn positive(path: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::invalid(path, format!("must be positive, got {v}")))
    }
}

impl Config {
    fn validate(&self, base: &Path) -> CliResult<()> {
        if let Some(r) = &self.radar {
            r.resolve()?;
        }
        if let Some(roc) = &self.roc {
            roc.resolve()?;
        }
        if let Some(su) = &self.su {
            su.resolve()?;
        }
        if let Some(pl) = &self.pathloss {
            pl.resolve(base)?;
        }
        if let Some(f) = &self.field {
            f.resolve()?;
        }
        self.policy.validate()?;
        if let Some(l) = &self.link {
            l.validate()?;
        }
        self.sweeps.validate()?;
        self.mc.validate()?;
        Ok(())
    }
}

const RADAR_RENAMES: &[(&str, &str)] = &[
    ("wavelength_m", "frequency_hz"),
    ("scan_time_s", "scan_rate_deg_per_s"),
    ("az_beamwidth_rad", "az_beamwidth_deg"),
    ("el_beamwidth_rad", "el_beamwidth_deg"),
];

impl RadarConfig {
    pub fn resolve(&self) -> CliResult<RadarSystem> {
        positive("radar.frequency_hz", self.frequency_hz)?;
        positive("radar.scan_rate_deg_per_s", self.scan_rate_deg_per_s)?;
        positive("radar.el_beamwidth_deg", self.el_beamwidth_deg)?;
        let el = self.el_beamwidth_deg.to_radians();
        let radar = RadarSystem {
            tx_power_w: self.tx_power_w,
            wavelength_m: SPEED_OF_LIGHT / self.frequency_hz,
            peak_gain_dbi: self.peak_gain_dbi,
            prf_hz: self.prf_hz,
            pulse_width_s: self.pulse_width_s,
            if_bandwidth_hz: self.if_bandwidth_hz,
            noise_figure_db: self.noise_figure_db,
            ambient_temp_k: self.ambient_temp_k,
            scan_time_s: 360.0 / self.scan_rate_deg_per_s,
            scan_solid_angle_sr: self.scan_solid_angle_sr.unwrap_or(2.0 * PI * el),
            az_beamwidth_rad: self.az_beamwidth_deg.to_radians(),
            el_beamwidth_rad: el,
            system_loss_db: self.system_loss_db,
            antenna_efficiency: self.antenna_efficiency,
            antenna_height_m: self.antenna_height_m,
        };
        radar
            .validate()
            .map_err(|e| CliError::from_core_validation("radar", e, RADAR_RENAMES))?;
        self.pattern()?;
        Ok(radar)
    }

    pub fn pattern(&self) -> CliResult<AntennaPattern> {
        AntennaPattern::new(self.peak_gain_dbi).map_err(|e| CliError::invalid("radar.peak_gain_dbi", e.to_string()))
    }
}

fn roc_point(path: &str, p: RocPointConfig) -> CliResult<RocPoint> {
    RocPoint::new(p.pd, p.pfa).map_err(|e| CliError::invalid(path, e.to_string()))
}

impl RocConfig {
    pub fn resolve(&self) -> CliResult<(RocPoint, RocPoint)> {
        let base = roc_point("roc.baseline", self.baseline)?;
        let degraded = roc_point("roc.degraded", self.degraded)?;
        if let Some(s) = self.baseline_snr_db {
            finite("roc.baseline_snr_db", s)?;
        }
        positive("roc.target_rcs_m2", self.target_rcs_m2)?;
        Ok((base, degraded))
    }
}

impl SuConfig {
    pub fn resolve(&self) -> CliResult<SecondaryUser> {
        finite("su.eirp_dbm", self.eirp_dbm)?;
        let su = SecondaryUser {
            eirp_w: dbm_to_watts(self.eirp_dbm),
            bandwidth_hz: self.bandwidth_hz,
            antenna_gain_dbi: self.antenna_gain_dbi,
            antenna_height_m: self.antenna_height_m,
            noise_figure_db: self.noise_figure_db,
            delta_f_hz: self.delta_f_hz,
        };
        su.validate()
            .map_err(|e| CliError::from_core_validation("su", e, &[("eirp_w", "eirp_dbm")]))?;
        Ok(su)
    }
}

impl PathLossConfig {
    pub fn resolve(&self, base: &Path) -> CliResult<PathLossModel> {
        match self {
            PathLossConfig::PowerLaw { k0, alpha } => {
                PathLossModel::power_law(*k0, *alpha).map_err(|e| CliError::from_core_validation("pathloss", e, &[]))
            }
            PathLossConfig::Tabulated {
                csv,
                extrapolate,
                fit_range_m,
            } => {
                if let Some([lo, hi]) = fit_range_m {
                    if !(*lo > 0.0 && hi > lo) {
                        return Err(CliError::invalid("pathloss.fit_range_m", "need 0 < lo < hi"));
                    }
                }
                let path = base.join(csv);
                let file = File::open(&path).map_err(|source| CliError::Io { path, source })?;
                let table = TabulatedPathLoss::from_csv(file, *extrapolate)
                    .map_err(|e| CliError::invalid("pathloss.csv", e.to_string()))?;
                Ok(PathLossModel::Tabulated(table))
            }
        }
    }
}

impl FieldConfig {
    pub fn resolve(&self) -> CliResult<DeploymentField> {
        DeploymentField::new(self.density_per_m2, self.activity_prob, self.outage_max)
            .map_err(|e| CliError::from_core_validation("field", e, &[]))
    }
}

impl PolicyConfig {
    fn validate(&self) -> CliResult<()> {
        if let Some(w) = self.lobe_width_deg {
            if !(w > 0.0 && w < 360.0) {
                return Err(CliError::invalid("policy.lobe_width_deg", "must lie in (0, 360)"));
            }
        }
        if let Some(b) = self.beta {
            if !(b >= 1.0 && b.is_finite()) {
                return Err(CliError::invalid("policy.beta", "must be at least 1"));
            }
        }
        let grid = self.beta_grid.points("policy.beta_grid")?;
        if grid[0] < 1.0 {
            return Err(CliError::invalid("policy.beta_grid", "values must be at least 1"));
        }
        if self.n_azimuths == 0 {
            return Err(CliError::invalid("policy.n_azimuths", "must be at least 1"));
        }
        Ok(())
    }
}

impl LinkConfig {
    fn validate(&self) -> CliResult<()> {
        positive("link.link_loss_db", self.link_loss_db)?;
        if let Some(v) = self.rx_noise_figure_db {
            finite("link.rx_noise_figure_db", v)?;
        }
        if let Some(v) = self.rx_bandwidth_hz {
            positive("link.rx_bandwidth_hz", v)?;
        }
        if self.time_steps < 8 {
            return Err(CliError::invalid("link.time_steps", "must be at least 8"));
        }
        if let Some(d) = self.trace_distance_m {
            positive("link.trace_distance_m", d)?;
        }
        Ok(())
    }

    pub fn resolve(&self, su: &SecondaryUser) -> CliResult<WifiLink> {
        let link = WifiLink {
            link_loss_db: self.link_loss_db,
            su: su.clone(),
            rx_noise_figure_db: self.rx_noise_figure_db.unwrap_or(su.noise_figure_db),
            rx_bandwidth_hz: self.rx_bandwidth_hz.unwrap_or(su.bandwidth_hz),
        };
        link.validate().map_err(|e| CliError::from_core_validation("link", e, &[]))?;
        Ok(link)
    }
}

impl SweepConfig {
    fn validate(&self) -> CliResult<()> {
        self.theta_deg.points("sweeps.theta_deg")?;
        let d = self.distance_m.points("sweeps.distance_m")?;
        if d[0] <= 0.0 {
            return Err(CliError::invalid("sweeps.distance_m", "distances must be positive"));
        }
        if let Some(g) = &self.density_per_m2 {
            if g.points("sweeps.density_per_m2")?[0] <= 0.0 {
                return Err(CliError::invalid("sweeps.density_per_m2", "densities must be positive"));
            }
        }
        let drops = self.pd_drop.points("sweeps.pd_drop")?;
        if drops[0] < 0.0 {
            return Err(CliError::invalid("sweeps.pd_drop", "drops must be non-negative"));
        }
        let pd = self.pd.points("sweeps.pd")?;
        if !(pd[0] > 0.0 && pd[pd.len() - 1] < 1.0) {
            return Err(CliError::invalid("sweeps.pd", "probabilities must lie in (0, 1)"));
        }
        Ok(())
    }
}

impl McConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.samples == 0 {
            return Err(CliError::invalid("mc.samples", "must be at least 1"));
        }
        if !(self.strong_fraction > 0.0 && self.strong_fraction < 1.0) {
            return Err(CliError::invalid("mc.strong_fraction", "must lie in (0, 1)"));
        }
        if !(self.outer_radius_factor > 1.0 && self.outer_radius_factor.is_finite()) {
            return Err(CliError::invalid("mc.outer_radius_factor", "must exceed 1"));
        }
        Ok(())
    }
}
