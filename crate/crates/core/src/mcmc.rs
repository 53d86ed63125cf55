//! Sampler plumbing shared by the MRF and GRM fitters: run configuration,
//! adaptive random-walk scales and posterior summaries.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Rng;

/// Acceptance rate targeted by the adaptive random-walk proposals.
pub const TARGET_ACCEPTANCE: f64 = 0.44;

/// Run length and seeding of a Markov chain Monte Carlo fit.
///
/// `iterations` counts every sweep including the `burn_in` ones; draws are
/// retained from the post-burn-in sweeps, one every `thin`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chains: usize,
    pub seed: u64,
}

impl McmcConfig {
    /// 20000 sweeps with 5000 burn-in, one chain, every draw kept.
    pub fn mrf_default() -> Self {
        Self {
            iterations: 20_000,
            burn_in: 5_000,
            thin: 1,
            chains: 1,
            seed: 1,
        }
    }

    /// Two chains of 15000 sweeps, 5000 burn-in, thinning 10.
    pub fn grm_default() -> Self {
        Self {
            iterations: 15_000,
            burn_in: 5_000,
            thin: 10,
            chains: 2,
            seed: 1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations <= self.burn_in {
            return Err(Error::InvalidConfig(format!(
                "iterations ({}) must exceed burn-in ({})",
                self.iterations, self.burn_in
            )));
        }
        if self.thin == 0 {
            return Err(Error::InvalidConfig("thinning must be at least 1".into()));
        }
        if self.chains == 0 {
            return Err(Error::InvalidConfig("at least one chain is required".into()));
        }
        Ok(())
    }

    /// Number of draws each chain keeps.
    pub fn retained_per_chain(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    /// Whether the 0-based sweep `t` produces a retained draw.
    pub fn retains(&self, t: usize) -> bool {
        t >= self.burn_in && (t - self.burn_in + 1).is_multiple_of(self.thin)
    }
}

/// Random-walk scale tuned by Robbins-Monro steps on its logarithm during
/// burn-in and frozen afterwards.
#[derive(Clone, Debug)]
pub struct AdaptiveScale {
    log_scale: f64,
}

impl AdaptiveScale {
    pub fn new(scale: f64) -> Self {
        Self {
            log_scale: scale.ln(),
        }
    }

    pub fn scale(&self) -> f64 {
        self.log_scale.exp()
    }

    /// Records one proposal outcome at sweep `t`; a no-op once `t` leaves
    /// burn-in.
    pub fn adapt(&mut self, accepted: bool, t: usize, burn_in: usize) {
        if t >= burn_in {
            return;
        }
        let rate = (t as f64 + 1.0).powf(-0.6);
        let signal = if accepted { 1.0 } else { 0.0 } - TARGET_ACCEPTANCE;
        self.log_scale = (self.log_scale + rate * signal).clamp(-12.0, 6.0);
    }
}

/// Metropolis-Hastings acceptance test on a log ratio. NaN rejects.
pub fn accept(log_ratio: f64, rng: &mut Rng) -> bool {
    if log_ratio >= 0.0 {
        return true;
    }
    if log_ratio.is_nan() {
        return false;
    }
    let u: f64 = rng.random();
    u.ln() < log_ratio
}

/// Mean, standard deviation and equal-tailed 95% interval of a sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Summary {
    /// Returns `None` for an empty sample.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mean = mean(values);
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Some(Self {
            mean,
            sd: sample_variance(values).sqrt(),
            ci_low: quantile_sorted(&sorted, 0.025),
            ci_high: quantile_sorted(&sorted, 0.975),
        })
    }
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Variance with the `n - 1` denominator; zero for fewer than two values.
pub fn sample_variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}

/// Linearly interpolated quantile of an ascending sample.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grm_default_retains_two_thousand_draws() {
        let cfg = McmcConfig::grm_default();
        assert_eq!(cfg.chains * cfg.retained_per_chain(), 2000);
        let kept = (0..cfg.iterations).filter(|&t| cfg.retains(t)).count();
        assert_eq!(kept, cfg.retained_per_chain());
    }

    #[test]
    fn mrf_default_matches_published_run_length() {
        let cfg = McmcConfig::mrf_default();
        assert_eq!((cfg.iterations, cfg.burn_in), (20_000, 5_000));
        assert_eq!(cfg.retained_per_chain(), 15_000);
    }

    #[test]
    fn rejects_burn_in_beyond_iterations() {
        let cfg = McmcConfig {
            iterations: 10,
            burn_in: 10,
            ..McmcConfig::mrf_default()
        };
        assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn quantiles_interpolate() {
        let s = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile_sorted(&s, 0.5), 2.0);
        assert_eq!(quantile_sorted(&s, 0.125), 0.5);
        let sum = Summary::of(&s).unwrap();
        assert!(sum.ci_low <= sum.mean && sum.mean <= sum.ci_high);
        assert!((sum.sd - 2.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn scale_freezes_after_burn_in() {
        let mut s = AdaptiveScale::new(1.0);
        s.adapt(true, 0, 10);
        let tuned = s.scale();
        assert!(tuned > 1.0);
        s.adapt(false, 10, 10);
        assert_eq!(s.scale(), tuned);
    }
}
