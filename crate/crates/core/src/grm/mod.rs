//! Bayesian graded response model with a latent regression.
//!
//! Respondent `i` answers item `j` in category `h ∈ 1..=H` with
//!
//! ```text
//! P(Y_ij ≥ h) = logistic(γ_j (θ_i − β_j − δ_{h−1}))   for h = 2..=H
//! θ_i ~ N(x_iᵀα, σ²_θ),   (β_j, log γ_j) ~ N(0, sd_item²),
//! δ_h ~ N(0, sd_delta²),  α_k ~ N(0, sd_alpha²)
//! ```
//!
//! with `δ_1 = 0` anchoring the category offsets and `δ` strictly
//! increasing so the cumulative probabilities stay ordered.

mod diagnostics;
mod model;
mod posterior;
mod sampler;

pub use diagnostics::gelman_rubin;
pub use model::{category_prob, cumulative_prob, log_category_prob, loglik, GrmParams};
pub use posterior::{
    covariate_effects, rank_discrimination, CovariateEffect, GrmPosterior, ItemRank, ParamKind, ParamSummary,
};
pub use sampler::fit;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the published hyperparameter value 0.01 is read.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PrecisionConvention {
    /// The value is a precision: sd = 1/√value.
    Precision,
    /// The value is a variance: sd = √value.
    Variance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrmPrior {
    pub sigma2_theta: f64,
    pub sd_item: f64,
    pub sd_delta: f64,
    pub sd_alpha: f64,
}

/// Hyperparameter shared by the item, offset and regression priors.
pub const DEFAULT_HYPERPARAMETER: f64 = 0.01;

impl Default for GrmPrior {
    /// `0.01` read as a precision: sd 10 on every prior.
    fn default() -> Self {
        Self::from_hyperparameter(DEFAULT_HYPERPARAMETER, PrecisionConvention::Precision)
    }
}

impl GrmPrior {
    pub fn from_hyperparameter(value: f64, convention: PrecisionConvention) -> Self {
        let sd = match convention {
            PrecisionConvention::Precision => 1.0 / value.sqrt(),
            PrecisionConvention::Variance => value.sqrt(),
        };
        Self {
            sigma2_theta: 1.0,
            sd_item: sd,
            sd_delta: sd,
            sd_alpha: sd,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma2_theta", self.sigma2_theta),
            ("sd_item", self.sd_item),
            ("sd_delta", self.sd_delta),
            ("sd_alpha", self.sd_alpha),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidConfig(format!("prior {name} = {v} must be positive")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conventions() {
        let p = GrmPrior::default();
        assert!((p.sd_item - 10.0).abs() < 1e-12);
        assert_eq!(p.sigma2_theta, 1.0);
        let v = GrmPrior::from_hyperparameter(0.01, PrecisionConvention::Variance);
        assert!((v.sd_alpha - 0.1).abs() < 1e-15);
    }
}
