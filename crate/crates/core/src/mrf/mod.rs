//! Ordinal Markov random field with spike-and-slab edge selection.
//!
//! The joint model over 0-based scores `x` is the linear-by-linear pairwise
//! form
//!
//! ```text
//! p(x) ∝ exp( Σ_i μ_{i,x_i} + Σ_{i<j} θ_ij x_i x_j ),   μ_{i,0} = 0
//! ```
//!
//! Inference targets the pseudoposterior: the product of full conditionals
//! times a spike-and-slab prior on each `θ_ij` (point mass at zero, or a
//! Cauchy slab, chosen by a Bernoulli edge indicator) and independent normal
//! priors on the thresholds `μ`.

mod model;
mod posterior;
mod sampler;

pub use model::{conditional_distribution, conditional_logprob, pseudo_loglik, MrfState};
pub use posterior::{
    inclusion_bf10, inclusion_bf10_counts, median_probability_graph, write_edges_csv, EdgeReport, EdgeSign, EdgeSummary, MrfDraw, MrfPosterior,
    RetainedEdge, BF_CAP,
};
pub use sampler::fit;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default evidence threshold below which a retained edge is inconclusive.
pub const DEFAULT_BF_THRESHOLD: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MrfPrior {
    /// Scale of the Cauchy slab on included edge weights.
    pub slab_scale: f64,
    /// Prior Bernoulli probability that an edge is included.
    pub inclusion_prob: f64,
    /// Standard deviation of the normal prior on each threshold.
    pub threshold_sd: f64,
}

impl Default for MrfPrior {
    fn default() -> Self {
        Self {
            slab_scale: 2.5,
            inclusion_prob: 0.5,
            threshold_sd: 10.0,
        }
    }
}

impl MrfPrior {
    pub fn validate(&self) -> Result<()> {
        if !(self.slab_scale > 0.0 && self.slab_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!("slab scale {} must be positive", self.slab_scale)));
        }
        if !(self.inclusion_prob > 0.0 && self.inclusion_prob < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "inclusion prior {} must lie in (0, 1)",
                self.inclusion_prob
            )));
        }
        if !(self.threshold_sd > 0.0 && self.threshold_sd.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "threshold prior sd {} must be positive",
                self.threshold_sd
            )));
        }
        Ok(())
    }
}
