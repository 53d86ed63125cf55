//! Blockwise random-walk Metropolis for the GRM.
//!
//! A sweep updates each `θ_i`, each item pair `(β_j, log γ_j)`, each free
//! offset `δ_h` (`h ≥ 2`, proposals breaking the ordering are rejected) and
//! each regression weight `α_k`. The `n × M` matrix of cell log
//! probabilities is cached and only rewritten on acceptance.

use rand_distr::StandardNormal;
use rand::Rng as _;

use super::model::log_cell;
use super::{GrmParams, GrmPosterior, GrmPrior};
use crate::error::{Error, Result};
use crate::mcmc::{accept, AdaptiveScale, McmcConfig};
use crate::rng::{self, Rng};
use crate::survey::{CovariateMatrix, OrdinalMatrix};

const INITIAL_THETA_STEP: f64 = 1.0;
const INITIAL_ITEM_STEP: f64 = 0.1;
const INITIAL_DELTA_STEP: f64 = 0.05;
const INITIAL_ALPHA_STEP: f64 = 0.1;

/// Fits the GRM to complete 0-based responses (`h − 1` stored for category
/// `h`) with one covariate row per respondent.
///
/// Zero respondents is allowed; the draws then come from the prior.
pub fn fit(
    data: &OrdinalMatrix,
    covariates: &CovariateMatrix,
    prior: &GrmPrior,
    config: &McmcConfig,
) -> Result<GrmPosterior> {
    prior.validate()?;
    config.validate()?;
    if data.n_cols() == 0 {
        return Err(Error::InvalidConfig("the GRM needs at least one item".into()));
    }
    let n_cat = data.n_categories()[0];
    if n_cat < 2 || data.n_categories().iter().any(|&c| c != n_cat) {
        return Err(Error::InvalidConfig(
            "every GRM item must share the same number (≥ 2) of categories".into(),
        ));
    }
    if covariates.n_rows() != data.n_rows() {
        return Err(Error::InvalidConfig(format!(
            "{} covariate rows for {} respondents",
            covariates.n_rows(),
            data.n_rows()
        )));
    }

    let chains: Vec<Result<Vec<GrmParams>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.chains)
            .map(|c| {
                scope.spawn(move || {
                    Chain::new(data, covariates, prior, rng::stream(config.seed, c as u64)).run(config)
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Numerical("sampler thread panicked".into()))))
            .collect()
    });
    let chains = chains.into_iter().collect::<Result<Vec<_>>>()?;
    GrmPosterior::from_chains(
        data.names().to_vec(),
        covariates.names().to_vec(),
        n_cat,
        prior.clone(),
        config.clone(),
        chains,
    )
}

struct Chain<'a> {
    data: &'a OrdinalMatrix,
    x: &'a CovariateMatrix,
    prior: &'a GrmPrior,
    rng: Rng,
    params: GrmParams,
    /// `cell[i * m + j] = log P(Y_ij)`.
    cell: Vec<f64>,
    scratch: Vec<f64>,
    /// Latent regression means `x_iᵀα`.
    eta: Vec<f64>,
    theta_step: Vec<AdaptiveScale>,
    item_step: Vec<AdaptiveScale>,
    delta_step: Vec<AdaptiveScale>,
    alpha_step: Vec<AdaptiveScale>,
}

impl<'a> Chain<'a> {
    fn new(data: &'a OrdinalMatrix, x: &'a CovariateMatrix, prior: &'a GrmPrior, rng: Rng) -> Self {
        let (n, m, k) = (data.n_rows(), data.n_cols(), x.n_cols());
        let n_cat = data.n_categories()[0];
        let params = GrmParams::initial(n, m, n_cat, k);
        let mut chain = Self {
            data,
            x,
            prior,
            rng,
            params,
            cell: vec![0.0; n * m],
            scratch: vec![0.0; n * m],
            eta: vec![0.0; n],
            theta_step: vec![AdaptiveScale::new(INITIAL_THETA_STEP); n],
            item_step: vec![AdaptiveScale::new(INITIAL_ITEM_STEP); m],
            delta_step: vec![AdaptiveScale::new(INITIAL_DELTA_STEP); n_cat - 1],
            alpha_step: vec![AdaptiveScale::new(INITIAL_ALPHA_STEP); k],
        };
        for i in 0..n {
            for j in 0..m {
                chain.cell[i * m + j] = chain.log_cell(i, j, chain.params.theta[i], chain.params.beta[j], chain.params.log_gamma[j].exp(), None);
            }
        }
        chain
    }

    #[inline]
    fn log_cell(&self, i: usize, j: usize, theta: f64, beta: f64, gamma: f64, delta: Option<&[f64]>) -> f64 {
        let delta = delta.unwrap_or(&self.params.delta);
        log_cell(theta, gamma, beta, delta, self.data.get(i, j) as usize)
    }

    fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    fn run(mut self, config: &McmcConfig) -> Result<Vec<GrmParams>> {
        let mut draws = Vec::with_capacity(config.retained_per_chain());
        for t in 0..config.iterations {
            self.update_theta(t, config.burn_in);
            self.update_items(t, config.burn_in);
            self.update_delta(t, config.burn_in);
            self.update_alpha(t, config.burn_in);
            if config.retains(t) {
                if self.params.theta.iter().chain(&self.params.beta).any(|v| !v.is_finite()) {
                    return Err(Error::Numerical(format!("non-finite GRM state at sweep {t}")));
                }
                draws.push(self.params.clone());
            }
        }
        Ok(draws)
    }

    fn update_theta(&mut self, t: usize, burn_in: usize) {
        let m = self.data.n_cols();
        let inv_var = 1.0 / self.prior.sigma2_theta;
        for i in 0..self.params.theta.len() {
            let old = self.params.theta[i];
            let new = old + self.theta_step[i].scale() * self.normal();
            let mut delta_ll = 0.0;
            for j in 0..m {
                let v = self.log_cell(i, j, new, self.params.beta[j], self.params.log_gamma[j].exp(), None);
                self.scratch[j] = v;
                delta_ll += v - self.cell[i * m + j];
            }
            let e = self.eta[i];
            let log_prior = -0.5 * inv_var * ((new - e).powi(2) - (old - e).powi(2));
            let ok = accept(delta_ll + log_prior, &mut self.rng);
            if ok {
                self.params.theta[i] = new;
                self.cell[i * m..(i + 1) * m].copy_from_slice(&self.scratch[..m]);
            }
            self.theta_step[i].adapt(ok, t, burn_in);
        }
    }

    fn update_items(&mut self, t: usize, burn_in: usize) {
        let (n, m) = (self.data.n_rows(), self.data.n_cols());
        let inv_var = 1.0 / (self.prior.sd_item * self.prior.sd_item);
        for j in 0..m {
            let (b0, lg0) = (self.params.beta[j], self.params.log_gamma[j]);
            let s = self.item_step[j].scale();
            let b1 = b0 + s * self.normal();
            let lg1 = lg0 + s * self.normal();
            let g1 = lg1.exp();
            let mut delta_ll = 0.0;
            for i in 0..n {
                let v = self.log_cell(i, j, self.params.theta[i], b1, g1, None);
                self.scratch[i] = v;
                delta_ll += v - self.cell[i * m + j];
            }
            let log_prior = -0.5 * inv_var * (b1 * b1 + lg1 * lg1 - b0 * b0 - lg0 * lg0);
            let ok = accept(delta_ll + log_prior, &mut self.rng);
            if ok {
                self.params.beta[j] = b1;
                self.params.log_gamma[j] = lg1;
                for i in 0..n {
                    self.cell[i * m + j] = self.scratch[i];
                }
            }
            self.item_step[j].adapt(ok, t, burn_in);
        }
    }

    fn update_delta(&mut self, t: usize, burn_in: usize) {
        let (n, m) = (self.data.n_rows(), self.data.n_cols());
        let inv_var = 1.0 / (self.prior.sd_delta * self.prior.sd_delta);
        let len = self.params.delta.len();
        let gamma: Vec<f64> = self.params.log_gamma.iter().map(|g| g.exp()).collect();
        let mut proposal = self.params.delta.clone();
        for h in 1..len {
            let old = self.params.delta[h];
            let new = old + self.delta_step[h].scale() * self.normal();
            let ordered = self.params.delta[h - 1] < new && (h + 1 == len || new < self.params.delta[h + 1]);
            if !ordered {
                self.delta_step[h].adapt(false, t, burn_in);
                continue;
            }
            proposal[h] = new;
            let mut delta_ll = 0.0;
            for i in 0..n {
                let theta = self.params.theta[i];
                for j in 0..m {
                    let y = self.data.get(i, j) as usize;
                    // Only cells adjacent to the moved boundary change.
                    let k = i * m + j;
                    if y == h || y == h + 1 {
                        let v = log_cell(theta, gamma[j], self.params.beta[j], &proposal, y);
                        self.scratch[k] = v;
                        delta_ll += v - self.cell[k];
                    } else {
                        self.scratch[k] = self.cell[k];
                    }
                }
            }
            let log_prior = -0.5 * inv_var * (new * new - old * old);
            let ok = accept(delta_ll + log_prior, &mut self.rng);
            if ok {
                self.params.delta[h] = new;
                std::mem::swap(&mut self.cell, &mut self.scratch);
            } else {
                proposal[h] = old;
            }
            self.delta_step[h].adapt(ok, t, burn_in);
        }
    }

    fn update_alpha(&mut self, t: usize, burn_in: usize) {
        let n = self.data.n_rows();
        let inv_var_theta = 1.0 / self.prior.sigma2_theta;
        let inv_var = 1.0 / (self.prior.sd_alpha * self.prior.sd_alpha);
        for k in 0..self.params.alpha.len() {
            let old = self.params.alpha[k];
            let step = self.alpha_step[k].scale() * self.normal();
            let new = old + step;
            let mut delta_lp = 0.0;
            for i in 0..n {
                let x = self.x.row(i)[k];
                if x != 0.0 {
                    let r0 = self.params.theta[i] - self.eta[i];
                    let r1 = r0 - step * x;
                    delta_lp += -0.5 * inv_var_theta * (r1 * r1 - r0 * r0);
                }
            }
            let log_prior = -0.5 * inv_var * (new * new - old * old);
            let ok = accept(delta_lp + log_prior, &mut self.rng);
            if ok {
                self.params.alpha[k] = new;
                for i in 0..n {
                    self.eta[i] += step * self.x.row(i)[k];
                }
            }
            self.alpha_step[k].adapt(ok, t, burn_in);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grm::loglik;

    fn tiny() -> (OrdinalMatrix, CovariateMatrix) {
        let rows = vec![vec![0, 1, 2], vec![2, 2, 1], vec![1, 0, 0], vec![2, 1, 2]];
        let data = OrdinalMatrix::from_rows(vec![3; 3], &rows).unwrap();
        let x = CovariateMatrix::new(vec!["G".into()], 4, vec![0.0, 1.0, 0.0, 1.0]).unwrap();
        (data, x)
    }

    #[test]
    fn cached_cells_track_the_state() {
        let (data, x) = tiny();
        let prior = GrmPrior::default();
        let mut chain = Chain::new(&data, &x, &prior, rng::stream(3, 0));
        for t in 0..200 {
            chain.update_theta(t, 100);
            chain.update_items(t, 100);
            chain.update_delta(t, 100);
            chain.update_alpha(t, 100);
        }
        let cached: f64 = chain.cell.iter().sum();
        let direct = loglik(&chain.params, &data).unwrap();
        assert!((cached - direct).abs() < 1e-9, "{cached} vs {direct}");
        for i in 0..4 {
            let e: f64 = x.row(i).iter().zip(&chain.params.alpha).map(|(a, b)| a * b).sum();
            assert!((e - chain.eta[i]).abs() < 1e-12);
        }
        chain.params.validate().unwrap();
    }

    #[test]
    fn deterministic_given_seed() {
        let (data, x) = tiny();
        let cfg = McmcConfig {
            iterations: 300,
            burn_in: 100,
            thin: 2,
            chains: 2,
            seed: 11,
        };
        let a = fit(&data, &x, &GrmPrior::default(), &cfg).unwrap();
        let b = fit(&data, &x, &GrmPrior::default(), &cfg).unwrap();
        assert_eq!(a.chains(), b.chains());
        assert_eq!(a.chains()[0].len(), 100);
        assert_ne!(a.chains()[0], a.chains()[1]);
    }

    #[test]
    fn rejects_mixed_category_counts() {
        let data = OrdinalMatrix::from_rows(vec![3, 4], &[vec![0, 3]]).unwrap();
        let x = CovariateMatrix::empty(1);
        let err = fit(&data, &x, &GrmPrior::default(), &McmcConfig::grm_default()).unwrap_err();
        assert!(matches!(err, Error::InvalidConfig(_)));
        let x = CovariateMatrix::empty(2);
        let data = OrdinalMatrix::from_rows(vec![3], &[vec![1]]).unwrap();
        assert!(fit(&data, &x, &GrmPrior::default(), &McmcConfig::grm_default()).is_err());
    }
}
