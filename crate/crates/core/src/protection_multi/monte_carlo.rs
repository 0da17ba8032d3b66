//! Sampling the aggregate interference of a Poisson field.
//!
//! [`sample_aggregate`] places every transmitter of the field explicitly inside
//! an outer radius. When the field holds too many points for that,
//! [`sample_aggregate_hybrid`] places only the transmitters whose individual
//! contribution exceeds a threshold and adds the sum of all weaker ones as a
//! Gaussian with their exact Campbell mean and variance (no outer radius).
//!
//! Work is split into a fixed number of partitions, each driven by its own
//! ChaCha8 stream derived from the seed, so output depends only on the seed,
//! the sample count and the partition count.

use std::f64::consts::TAU;

use rand::distr::weighted::WeightedIndex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::{AggregateModel, CampbellStats, ProtectionProfile};
use crate::error::{Error, Result};

/// Largest tolerated analytic tail beyond the outer radius, as a fraction of
/// the mean.
pub const MAX_TAIL_FRACTION: f64 = 0.01;

/// Expected points per sample above which explicit sampling is refused.
const MAX_POINTS_PER_SAMPLE: f64 = 5e7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    pub n_samples: usize,
    pub seed: u64,
    /// Independent RNG streams; part of the determinism contract.
    pub partitions: usize,
    /// Angular bins used to bound the sampling region.
    pub angular_bins: usize,
}

impl SamplerOptions {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        SamplerOptions {
            n_samples,
            seed,
            partitions: 16,
            angular_bins: 1440,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::invalid("mc.samples", "must be at least 1"));
        }
        if self.partitions == 0 || self.angular_bins == 0 {
            return Err(Error::invalid("mc.partitions", "partitions and bins must be at least 1"));
        }
        Ok(())
    }

    fn partition_sizes(&self) -> Vec<usize> {
        let base = self.n_samples / self.partitions;
        let extra = self.n_samples % self.partitions;
        (0..self.partitions).map(|k| base + usize::from(k < extra)).collect()
    }
}

/// Annular sectors `[a, b] × [lo, hi]` that cover the sampling region.
struct Sectors {
    bins: Vec<(f64, f64, f64, f64)>,
    index: Option<WeightedIndex<f64>>,
    expected_points: f64,
}

impl Sectors {
    fn new(model: &AggregateModel, n_bins: usize, bounds: impl Fn(f64, f64) -> (f64, f64)) -> Result<Self> {
        let h = TAU / n_bins as f64;
        let bins: Vec<_> = (0..n_bins)
            .map(|j| {
                let (a, b) = (j as f64 * h, (j + 1) as f64 * h);
                let (lo, hi) = bounds(a, b);
                (a, b, lo, hi.max(lo))
            })
            .collect();
        let weights: Vec<f64> = bins.iter().map(|&(a, b, lo, hi)| (hi * hi - lo * lo) / 2.0 * (b - a)).collect();
        let area: f64 = weights.iter().sum();
        let expected_points = model.field.active_density() * area;
        if expected_points > MAX_POINTS_PER_SAMPLE {
            return Err(Error::domain(
                "sample_aggregate",
                format!("{expected_points:.3e} expected points per sample exceeds the limit of {MAX_POINTS_PER_SAMPLE:.0e}"),
            ));
        }
        let index = if area > 0.0 {
            Some(WeightedIndex::new(&weights).map_err(|e| Error::domain("sample_aggregate", e.to_string()))?)
        } else {
            None
        };
        Ok(Sectors {
            bins,
            index,
            expected_points,
        })
    }

    /// Sum `value(r, θ)` over one Poisson draw of points in the sectors;
    /// `value` returns `None` for rejected points.
    fn draw<R: Rng>(&self, rng: &mut R, value: impl Fn(f64, f64) -> Option<f64>) -> f64 {
        let Some(index) = &self.index else { return 0.0 };
        let n = Poisson::new(self.expected_points).map(|p| p.sample(rng)).unwrap_or(0.0) as u64;
        let mut sum = 0.0;
        for _ in 0..n {
            let (a, b, lo, hi) = self.bins[index.sample(rng)];
            let theta = a + (b - a) * rng.random::<f64>();
            let r = (lo * lo + (hi * hi - lo * lo) * rng.random::<f64>()).sqrt();
            if let Some(v) = value(r, theta) {
                sum += v;
            }
        }
        sum
    }
}

fn run_partitions(opts: &SamplerOptions, sample: impl Fn(&mut ChaCha8Rng) -> f64 + Sync) -> Vec<f64> {
    opts.partition_sizes()
        .into_par_iter()
        .enumerate()
        .map(|(k, size)| {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(k as u64);
            (0..size).map(|_| sample(&mut rng)).collect::<Vec<f64>>()
        })
        .collect::<Vec<_>>()
        .concat()
}

/// Aggregate interference samples from every transmitter between the profile
/// and `outer_radius_m`.
pub fn sample_aggregate(
    model: &AggregateModel,
    profile: &dyn ProtectionProfile,
    outer_radius_m: f64,
    opts: &SamplerOptions,
) -> Result<Vec<f64>> {
    opts.validate()?;
    if !(outer_radius_m > profile.max_distance_m()) {
        return Err(Error::invalid("mc.outer_radius_m", "must exceed the largest protection distance"));
    }
    let full = model.campbell_stats(profile).mean_w;
    let truncated = model.campbell_stats_truncated(profile, outer_radius_m).mean_w;
    let tail_fraction = (full - truncated) / full;
    if tail_fraction > MAX_TAIL_FRACTION {
        return Err(Error::TruncationTooSevere {
            tail_fraction,
            limit: MAX_TAIL_FRACTION,
        });
    }
    let sectors = Sectors::new(model, opts.angular_bins, |a, b| (profile.min_distance_on(a, b), outer_radius_m))?;
    let c = model.unit_contribution();
    let alpha = model.alpha;
    Ok(run_partitions(opts, |rng| {
        sectors.draw(rng, |r, theta| {
            (r >= profile.distance_m(theta)).then(|| c * model.pattern.gain_linear(theta) * r.powf(-alpha))
        })
    }))
}

/// Output of [`sample_aggregate_hybrid`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HybridSamples {
    pub values: Vec<f64>,
    /// Contributions at or above this level are sampled point by point.
    pub threshold_w: f64,
    /// Exact Campbell moments of all weaker contributions.
    pub remainder: CampbellStats,
    pub expected_strong_points: f64,
}

/// Aggregate samples: explicit points for every contribution of at least
/// `strong_fraction · σ_I`, plus a Gaussian for the unbounded remainder.
///
/// The remainder's skewness is at most `strong_fraction`, so the Gaussian
/// step is accurate whenever the threshold is small; the strong part keeps
/// the full non-Gaussian character of the nearby transmitters.
pub fn sample_aggregate_hybrid(
    model: &AggregateModel,
    profile: &dyn ProtectionProfile,
    strong_fraction: f64,
    opts: &SamplerOptions,
) -> Result<HybridSamples> {
    opts.validate()?;
    if !(strong_fraction > 0.0 && strong_fraction.is_finite()) {
        return Err(Error::invalid("mc.strong_fraction", "must be positive"));
    }
    let full = model.campbell_stats(profile);
    let threshold_w = strong_fraction * full.std_dev_w();
    let c = model.unit_contribution();
    let alpha = model.alpha;
    let strong_radius = |gain: f64| (c * gain / threshold_w).powf(1.0 / alpha);

    let lo = |t: f64| profile.distance_m(t).max(strong_radius(model.pattern.gain_linear(t)));
    let breaks = profile.breakpoints();
    let remainder = CampbellStats {
        mean_w: model.region_cumulant(1, &lo, None, &breaks),
        variance_w2: model.region_cumulant(2, &lo, None, &breaks),
        c_mu: full.c_mu,
        c_sigma2: full.c_sigma2,
    };
    let sigma_rest = remainder.std_dev_w();

    let sectors = Sectors::new(model, opts.angular_bins, |a, b| {
        (profile.min_distance_on(a, b), strong_radius(model.pattern.max_gain_linear_on(a, b)))
    })?;
    let values = run_partitions(opts, |rng| {
        let strong = sectors.draw(rng, |r, theta| {
            if r < profile.distance_m(theta) {
                return None;
            }
            let v = c * model.pattern.gain_linear(theta) * r.powf(-alpha);
            (v >= threshold_w).then_some(v)
        });
        let z: f64 = StandardNormal.sample(rng);
        strong + remainder.mean_w + sigma_rest * z
    });
    Ok(HybridSamples {
        values,
        threshold_w,
        remainder,
        expected_strong_points: sectors.expected_points,
    })
}

/// Sample mean and unbiased variance.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, var)
}

/// Fraction of samples strictly above `level`.
pub fn exceedance(xs: &[f64], level: f64) -> f64 {
    xs.iter().filter(|&&x| x > level).count() as f64 / xs.len() as f64
}
