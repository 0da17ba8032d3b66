//! Coexistence analysis between a rotating search radar and secondary WiFi
//! networks.
//!
//! The crate is organised bottom-up:
//!
//! - [`numerics`]: Gaussian tail functions, bisection, periodic quadrature and
//!   power-law regression shared by everything else.
//! - [`radar`]: noise-limited detection budget (radar equation, pulse
//!   integration, P_D / P_FA / SNR relations).
//! - [`propagation`]: path-loss models, the statistical radar antenna pattern
//!   and frequency-dependent rejection.
//! - [`protection_single`]: tolerable interference and per-azimuth protection
//!   distance for one secondary transmitter.
//! - [`protection_multi`]: Poisson-field aggregate interference, the three
//!   sharing policies, area accounting and a Monte Carlo sampler.
//! - [`wifi`]: radar-to-WiFi interference, MCS mapping and throughput.
//!
//! Angles are radians internally; degrees only appear in function names or
//! fields that say so. Power ratios are linear unless the name ends in `_db`.

pub mod error;
pub mod numerics;
pub mod propagation;
pub mod protection_multi;
pub mod protection_single;
pub mod radar;
pub mod units;
pub mod wifi;

pub use error::{Error, Result};
