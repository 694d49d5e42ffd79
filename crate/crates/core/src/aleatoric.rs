//! Bootstrap estimation of measurement dispersion for aleatoric evidence.
//!
//! The dispersion statistic is the coefficient of variation `|std / mean|`
//! (population standard deviation), or plain `std` when the mean is
//! indistinguishable from zero. Resampling is seeded explicitly and the input is
//! sorted first, so permuted inputs produce identical estimates.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::taxonomy::{Observation, Payload};

pub const MIN_TRIALS: usize = 100;
pub const DEFAULT_TRIALS: usize = 10_000;
pub const DEFAULT_DISPERSION_CAP: f64 = 1.0;
/// Means smaller than this fraction of the largest absolute sample count as zero.
pub const RELATIVE_ZERO_MEAN: f64 = 1e-9;

/// Certainty reported when there is too little data to resample.
pub const NEUTRAL_CERTAINTY: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub trials: usize,
    pub seed: u64,
    pub dispersion_cap: f64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        MonteCarloConfig {
            trials: DEFAULT_TRIALS,
            seed: 0,
            dispersion_cap: DEFAULT_DISPERSION_CAP,
        }
    }
}

impl MonteCarloConfig {
    pub fn new(trials: usize, seed: u64, dispersion_cap: f64) -> Result<Self> {
        let cfg = MonteCarloConfig {
            trials,
            seed,
            dispersion_cap,
        };
        cfg.check()?;
        Ok(cfg)
    }

    pub fn check(&self) -> Result<()> {
        if self.trials < MIN_TRIALS {
            return Err(Error::Config(format!(
                "monte carlo trials must be at least {MIN_TRIALS}, got {}",
                self.trials
            )));
        }
        if !(self.dispersion_cap.is_finite() && self.dispersion_cap > 0.0) {
            return Err(Error::Config(format!(
                "dispersion cap must be a positive number, got {}",
                self.dispersion_cap
            )));
        }
        Ok(())
    }

    pub fn with_seed(self, seed: u64) -> Self {
        MonteCarloConfig { seed, ..self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionEstimate {
    /// Bootstrap mean of the dispersion statistic.
    pub point_estimate: f64,
    /// Mean of the resample means (location of the data, for reporting).
    pub resample_mean: f64,
    /// Standard deviation of the dispersion statistic across resamples.
    pub resample_std: f64,
}

fn moments(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn dispersion(mean: f64, std: f64, scale: f64) -> f64 {
    if mean.abs() > RELATIVE_ZERO_MEAN * scale {
        (std / mean).abs()
    } else {
        std
    }
}

/// Sample statistic without resampling; useful as a reference value.
pub fn sample_dispersion(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    let scale = samples.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let (mean, std) = moments(samples.iter().copied());
    Ok(dispersion(mean, std, scale))
}

pub fn monte_carlo_estimate(
    samples: &[f64],
    config: &MonteCarloConfig,
) -> Result<DispersionEstimate> {
    if samples.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: samples.len(),
        });
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("non-finite sample".into()));
    }
    config.check()?;

    let mut data = samples.to_vec();
    data.sort_by(f64::total_cmp);
    if data.first() == data.last() {
        return Ok(DispersionEstimate {
            point_estimate: 0.0,
            resample_mean: data[0],
            resample_std: 0.0,
        });
    }

    let n = data.len();
    let scale = data.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    // Each 64-bit draw yields two indices by widening multiply; the bias is
    // below n / 2^32 and far under the resampling noise.
    let n64 = n as u64;
    let (mut bits, mut spare) = (0u64, false);
    let mut index = move |rng: &mut ChaCha8Rng| {
        let half = if spare {
            bits >> 32
        } else {
            bits = rng.next_u64();
            bits & 0xffff_ffff
        };
        spare = !spare;
        ((half * n64) >> 32) as usize
    };
    // Moments are accumulated on data centred at the sample mean, which keeps
    // the one-pass variance accurate for nearly constant inputs.
    let center = data.iter().sum::<f64>() / n as f64;
    let centred: Vec<f64> = data.iter().map(|v| v - center).collect();
    let inv_n = 1.0 / n as f64;

    // Welford accumulation of the statistic
    let (mut count, mut stat_mean, mut stat_m2) = (0.0, 0.0, 0.0);
    let mut location_sum = 0.0;
    for _ in 0..config.trials {
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let d = centred[index(&mut rng)];
            s1 += d;
            s2 += d * d;
        }
        let shift = s1 * inv_n;
        let std = (s2 * inv_n - shift * shift).max(0.0).sqrt();
        let mean = center + shift;
        let stat = dispersion(mean, std, scale);
        location_sum += mean;
        count += 1.0;
        let delta = stat - stat_mean;
        stat_mean += delta / count;
        stat_m2 += delta * (stat - stat_mean);
    }

    Ok(DispersionEstimate {
        point_estimate: stat_mean,
        resample_mean: location_sum / count,
        resample_std: (stat_m2 / count).sqrt(),
    })
}

/// `1 - min(dispersion, cap) / cap`.
pub fn dispersion_to_certainty(estimate: &DispersionEstimate, config: &MonteCarloConfig) -> f64 {
    let cap = config.dispersion_cap;
    1.0 - estimate.point_estimate.min(cap) / cap
}

pub fn quantify_samples(samples: &[f64], config: &MonteCarloConfig) -> Result<f64> {
    match monte_carlo_estimate(samples, config) {
        Ok(est) => Ok(dispersion_to_certainty(&est, config)),
        Err(Error::InsufficientData { got, .. }) => {
            log::warn!("only {got} sample(s) for aleatoric facet; using neutral certainty");
            Ok(NEUTRAL_CERTAINTY)
        }
        Err(e) => Err(e),
    }
}

/// Certainty score in `[0, 1]` for a quantitative observation.
pub fn quantify_aleatoric(observation: &Observation, config: &MonteCarloConfig) -> Result<f64> {
    match observation.payload() {
        Payload::Quant { samples, .. } => quantify_samples(samples, config),
        Payload::Qual { .. } => Err(Error::Taxonomy(format!(
            "facet {} carries a qualitative payload",
            observation.facet()
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(trials: usize, seed: u64) -> MonteCarloConfig {
        MonteCarloConfig::new(trials, seed, 1.0).unwrap()
    }

    #[test]
    fn constant_samples_have_zero_dispersion() {
        let est = monte_carlo_estimate(&[5.0, 5.0, 5.0, 5.0], &cfg(1000, 1)).unwrap();
        assert_eq!(est.point_estimate, 0.0);
        assert_eq!(est.resample_std, 0.0);
        assert_eq!(
            quantify_samples(&[3.0, 3.0, 3.0], &cfg(1000, 1)).unwrap(),
            1.0
        );
    }

    #[test]
    fn bernoulli_half_recovers_unit_cv() {
        // closed form: std 0.5 / mean 0.5
        let samples: Vec<f64> = (0..1000).map(|i| (i % 2) as f64).collect();
        let est = monte_carlo_estimate(&samples, &cfg(2000, 7)).unwrap();
        assert!((est.point_estimate - 1.0).abs() < 0.05, "{est:?}");
        assert!((est.resample_mean - 0.5).abs() < 0.01);
    }

    #[test]
    fn reruns_are_bit_identical_and_order_free() {
        let samples = [1.0, 4.0, 2.5, 3.3, 0.7, 2.2];
        let a = monte_carlo_estimate(&samples, &cfg(500, 99)).unwrap();
        let b = monte_carlo_estimate(&samples, &cfg(500, 99)).unwrap();
        assert_eq!(a.point_estimate.to_bits(), b.point_estimate.to_bits());
        assert_eq!(a.resample_std.to_bits(), b.resample_std.to_bits());
        let mut rev = samples;
        rev.reverse();
        assert_eq!(a, monte_carlo_estimate(&rev, &cfg(500, 99)).unwrap());
        assert_ne!(a, monte_carlo_estimate(&samples, &cfg(500, 100)).unwrap());
    }

    #[test]
    fn certainty_map() {
        let c = cfg(100, 0);
        let est = |d| DispersionEstimate {
            point_estimate: d,
            resample_mean: 1.0,
            resample_std: 0.0,
        };
        assert_eq!(dispersion_to_certainty(&est(0.0), &c), 1.0);
        assert_eq!(dispersion_to_certainty(&est(1.0), &c), 0.0);
        assert_eq!(dispersion_to_certainty(&est(7.5), &c), 0.0);
        assert_eq!(dispersion_to_certainty(&est(0.5), &c), 0.5);
        let c2 = MonteCarloConfig::new(100, 0, 0.4).unwrap();
        assert!((dispersion_to_certainty(&est(0.2), &c2) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn heavy_noise_saturates() {
        let samples = [-5.0, 5.2, -4.0, 6.0, -6.0, 4.5];
        assert_eq!(quantify_samples(&samples, &cfg(1000, 3)).unwrap(), 0.0);
    }

    #[test]
    fn quarter_cv_maps_to_three_quarters() {
        // two-point distribution m*(1 ± 0.25) has population CV exactly 0.25
        let samples: Vec<f64> = (0..1000)
            .map(|i| if i % 2 == 0 { 8.0 * 1.25 } else { 8.0 * 0.75 })
            .collect();
        assert!((sample_dispersion(&samples).unwrap() - 0.25).abs() < 1e-12);
        let q = quantify_samples(&samples, &cfg(2000, 5)).unwrap();
        assert!((q - 0.75).abs() < 0.05, "{q}");
    }

    #[test]
    fn insufficient_data_falls_back() {
        assert!(matches!(
            monte_carlo_estimate(&[1.0], &cfg(100, 0)),
            Err(Error::InsufficientData { got: 1, .. })
        ));
        assert_eq!(
            quantify_samples(&[1.0], &cfg(100, 0)).unwrap(),
            NEUTRAL_CERTAINTY
        );
    }

    #[test]
    fn near_zero_mean_uses_std() {
        let samples = [-1.0, 1.0, -1.0, 1.0];
        assert_eq!(sample_dispersion(&samples).unwrap(), 1.0);
    }

    #[test]
    fn config_bounds() {
        assert!(MonteCarloConfig::new(99, 0, 1.0).is_err());
        assert!(MonteCarloConfig::new(100, 0, 0.0).is_err());
        assert!(MonteCarloConfig::new(100, 0, f64::NAN).is_err());
    }

    #[test]
    fn scale_invariance_of_cv_branch() {
        let samples = [2.0, 3.5, 2.9, 4.1, 3.3, 2.2, 3.9];
        let scaled: Vec<f64> = samples.iter().map(|v| v * 37.25).collect();
        let a = monte_carlo_estimate(&samples, &cfg(1000, 11)).unwrap();
        let b = monte_carlo_estimate(&scaled, &cfg(1000, 11)).unwrap();
        assert!((a.point_estimate - b.point_estimate).abs() < 1e-12);
    }
}
