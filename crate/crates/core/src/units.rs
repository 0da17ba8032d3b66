//! Physical constants and dB helpers.

/// Boltzmann constant, J/K (exact SI value).
pub const BOLTZMANN: f64 = 1.380649e-23;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Reference noise temperature, K.
pub const T0_KELVIN: f64 = 290.0;

#[inline]
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

#[inline]
pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

#[inline]
pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

#[inline]
pub fn deg_to_rad(deg: f64) -> f64 {
    deg.to_radians()
}

#[inline]
pub fn rad_to_deg(rad: f64) -> f64 {
    rad.to_degrees()
}

/// Thermal noise power `k·T·F·B` in watts.
pub fn thermal_noise_w(noise_figure_db: f64, temperature_k: f64, bandwidth_hz: f64) -> f64 {
    BOLTZMANN * temperature_k * db_to_linear(noise_figure_db) * bandwidth_hz
}
