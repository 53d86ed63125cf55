//! Metropolis-within-Gibbs on the MRF pseudoposterior.
//!
//! Each sweep updates every threshold by random-walk Metropolis, every
//! included edge weight by random-walk Metropolis, then every edge indicator
//! jointly with its weight by a birth/death move: a birth proposes a weight
//! drawn from the Cauchy slab, a death proposes weight zero. Because the
//! birth proposal is the slab itself, the slab density cancels and the
//! acceptance ratio reduces to the pseudolikelihood ratio times the prior
//! inclusion odds.
//!
//! Rest scores `s_vi = Σ_j θ_ij x_vj` and per-row log normalizers are cached
//! per variable so that an edge move only revisits the rows in which the
//! partner variable is nonzero.

use rand::Rng as _;
use rand_distr::{Cauchy, Distribution, StandardNormal};

use super::model::log_sum_exp;
use super::{MrfDraw, MrfPosterior, MrfPrior, MrfState};
use crate::error::{Error, Result};
use crate::mcmc::{accept, AdaptiveScale, McmcConfig};
use crate::rng::{self, Rng};
use crate::survey::OrdinalMatrix;

/// Sweeps between exact recomputations of the cached rest scores.
const REFRESH_INTERVAL: usize = 256;
const INITIAL_THRESHOLD_STEP: f64 = 0.2;
const INITIAL_EDGE_STEP: f64 = 0.1;
/// Beyond this exponent the Horner evaluation of the normalizer could
/// overflow and the log-sum-exp path is used instead.
const FAST_EXPONENT_LIMIT: f64 = 300.0;

/// Fits the spike-and-slab ordinal MRF to complete 0-based data.
///
/// Chains run concurrently, each on its own random stream, and their
/// retained draws are pooled in chain order. The result is a deterministic
/// function of `(data, prior, config)`.
pub fn fit(data: &OrdinalMatrix, prior: &MrfPrior, config: &McmcConfig) -> Result<MrfPosterior> {
    prior.validate()?;
    config.validate()?;
    if data.n_cols() < 2 {
        return Err(Error::InvalidConfig("an MRF needs at least two variables".into()));
    }
    if data.n_rows() == 0 {
        return Err(Error::InvalidConfig("an MRF needs at least one observation".into()));
    }
    MrfState::new(data.n_categories().to_vec())?;

    let chains: Vec<Result<Vec<MrfDraw>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..config.chains)
            .map(|c| scope.spawn(move || Chain::new(data, prior, rng::stream(config.seed, c as u64)).run(config)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(Error::Numerical("sampler thread panicked".into()))))
            .collect()
    });
    let mut draws = Vec::with_capacity(config.chains * config.retained_per_chain());
    for chain in chains {
        draws.extend(chain?);
    }
    MrfPosterior::from_draws(
        data.names().to_vec(),
        data.n_categories().to_vec(),
        prior.clone(),
        config.clone(),
        draws,
    )
}

fn log_normalizer(mu: &[f64], exp_mu: &[f64], fast: bool, r: f64) -> f64 {
    let m = mu.len() - 1;
    if fast && (r * m as f64).abs() < FAST_EXPONENT_LIMIT {
        let q = r.exp();
        let mut acc = exp_mu[m];
        for c in (0..m).rev() {
            acc = acc * q + exp_mu[c];
        }
        acc.ln()
    } else {
        log_sum_exp((0..=m).map(|c| mu[c] + c as f64 * r))
    }
}

fn fast_ok(mu: &[f64]) -> bool {
    mu.iter().all(|m| m.abs() < FAST_EXPONENT_LIMIT)
}

struct Chain<'a> {
    prior: &'a MrfPrior,
    n: usize,
    p: usize,
    /// Column-major scores.
    x: Vec<Vec<f64>>,
    nonzero: Vec<Vec<usize>>,
    counts: Vec<Vec<f64>>,
    cross: Vec<f64>,
    state: MrfState,
    /// `[0, μ_1, …, μ_m]` per variable, with matching exponentials.
    mu: Vec<Vec<f64>>,
    exp_mu: Vec<Vec<f64>>,
    fast: Vec<bool>,
    rest: Vec<Vec<f64>>,
    log_norm: Vec<Vec<f64>>,
    buf_a: Vec<f64>,
    buf_b: Vec<f64>,
    edge_index: Vec<usize>,
    edge_step: Vec<AdaptiveScale>,
    threshold_step: Vec<Vec<AdaptiveScale>>,
    slab: Cauchy<f64>,
    rng: Rng,
}

impl<'a> Chain<'a> {
    fn new(data: &OrdinalMatrix, prior: &'a MrfPrior, rng: Rng) -> Self {
        let n = data.n_rows();
        let p = data.n_cols();
        let x: Vec<Vec<f64>> = (0..p).map(|j| data.column(j).map(f64::from).collect()).collect();
        let nonzero = x
            .iter()
            .map(|col| (0..n).filter(|&v| col[v] != 0.0).collect())
            .collect();
        let counts: Vec<Vec<f64>> = (0..p)
            .map(|j| {
                let mut c = vec![0.0; data.n_categories()[j]];
                for v in data.column(j) {
                    c[v as usize] += 1.0;
                }
                c
            })
            .collect();
        let mut cross = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..p {
                cross[i * p + j] = x[i].iter().zip(&x[j]).map(|(a, b)| a * b).sum();
            }
        }

        let mut state = MrfState::new(data.n_categories().to_vec()).expect("validated by fit");
        for (i, c) in counts.iter().enumerate() {
            let init = (1..c.len()).map(|k| ((c[k] + 1.0) / (c[0] + 1.0)).ln()).collect();
            state.set_thresholds(i, init).expect("sized from data");
        }
        let edge_index = {
            let mut idx = vec![usize::MAX; p * p];
            let mut k = 0;
            for i in 0..p {
                for j in i + 1..p {
                    idx[i * p + j] = k;
                    k += 1;
                }
            }
            idx
        };
        let n_edges = p * (p - 1) / 2;
        let threshold_step = counts
            .iter()
            .map(|c| vec![AdaptiveScale::new(INITIAL_THRESHOLD_STEP); c.len() - 1])
            .collect();
        let mut chain = Self {
            prior,
            n,
            p,
            x,
            nonzero,
            counts,
            cross,
            state,
            mu: Vec::new(),
            exp_mu: Vec::new(),
            fast: Vec::new(),
            rest: vec![vec![0.0; n]; p],
            log_norm: vec![vec![0.0; n]; p],
            buf_a: Vec::with_capacity(n),
            buf_b: Vec::with_capacity(n),
            edge_index,
            edge_step: vec![AdaptiveScale::new(INITIAL_EDGE_STEP); n_edges],
            threshold_step,
            slab: Cauchy::new(0.0, prior.slab_scale).expect("validated prior"),
            rng,
        };
        chain.refresh();
        chain
    }

    /// Recomputes every cache from the current state.
    fn refresh(&mut self) {
        let (n, p) = (self.n, self.p);
        self.mu = (0..p)
            .map(|i| std::iter::once(0.0).chain(self.state.thresholds(i).iter().copied()).collect())
            .collect();
        self.exp_mu = self.mu.iter().map(|m| m.iter().map(|v| v.exp()).collect()).collect();
        self.fast = self.mu.iter().map(|m| fast_ok(m)).collect();
        for i in 0..p {
            for v in 0..n {
                let mut s = 0.0;
                for j in 0..p {
                    if j != i {
                        s += self.state.theta(i, j) * self.x[j][v];
                    }
                }
                self.rest[i][v] = s;
                self.log_norm[i][v] = log_normalizer(&self.mu[i], &self.exp_mu[i], self.fast[i], s);
            }
        }
    }

    fn run(mut self, config: &McmcConfig) -> Result<Vec<MrfDraw>> {
        let mut draws = Vec::with_capacity(config.retained_per_chain());
        for t in 0..config.iterations {
            self.sweep(t, config.burn_in);
            if (t + 1) % REFRESH_INTERVAL == 0 {
                self.refresh();
            }
            if config.retains(t) {
                draws.push(MrfDraw::from_state(&self.state));
            }
        }
        self.state.validate().map_err(|e| Error::Numerical(e.to_string()))?;
        Ok(draws)
    }

    fn sweep(&mut self, t: usize, burn_in: usize) {
        for i in 0..self.p {
            for c in 1..self.mu[i].len() {
                let accepted = self.update_threshold(i, c);
                self.threshold_step[i][c - 1].adapt(accepted, t, burn_in);
            }
        }
        for i in 0..self.p {
            for j in i + 1..self.p {
                if self.state.is_included(i, j) {
                    let accepted = self.update_weight(i, j);
                    self.edge_step[self.edge_index[i * self.p + j]].adapt(accepted, t, burn_in);
                }
            }
        }
        for i in 0..self.p {
            for j in i + 1..self.p {
                self.update_indicator(i, j);
            }
        }
    }

    fn update_threshold(&mut self, i: usize, c: usize) -> bool {
        let old = self.mu[i][c];
        let z: f64 = self.rng.sample(StandardNormal);
        let new = old + self.threshold_step[i][c - 1].scale() * z;
        let mut mu = self.mu[i].clone();
        mu[c] = new;
        let exp_mu: Vec<f64> = mu.iter().map(|v| v.exp()).collect();
        let fast = fast_ok(&mu);

        let mut log_ratio = (new - old) * self.counts[i][c];
        self.buf_a.clear();
        for v in 0..self.n {
            let ln = log_normalizer(&mu, &exp_mu, fast, self.rest[i][v]);
            log_ratio -= ln - self.log_norm[i][v];
            self.buf_a.push(ln);
        }
        let sd = self.prior.threshold_sd;
        log_ratio -= (new * new - old * old) / (2.0 * sd * sd);

        if !accept(log_ratio, &mut self.rng) {
            return false;
        }
        self.state.set_threshold(i, c, new);
        self.mu[i] = mu;
        self.exp_mu[i] = exp_mu;
        self.fast[i] = fast;
        std::mem::swap(&mut self.log_norm[i], &mut self.buf_a);
        true
    }

    /// Change in log pseudolikelihood from shifting `θ_ij` by `d`. Leaves
    /// the proposed normalizers in the scratch buffers for [`Self::commit`].
    fn edge_delta(&mut self, i: usize, j: usize, d: f64) -> f64 {
        let mut delta = 2.0 * d * self.cross[i * self.p + j];
        self.buf_a.clear();
        for &v in &self.nonzero[j] {
            let ln = log_normalizer(&self.mu[i], &self.exp_mu[i], self.fast[i], self.rest[i][v] + d * self.x[j][v]);
            delta -= ln - self.log_norm[i][v];
            self.buf_a.push(ln);
        }
        self.buf_b.clear();
        for &v in &self.nonzero[i] {
            let ln = log_normalizer(&self.mu[j], &self.exp_mu[j], self.fast[j], self.rest[j][v] + d * self.x[i][v]);
            delta -= ln - self.log_norm[j][v];
            self.buf_b.push(ln);
        }
        delta
    }

    fn commit(&mut self, i: usize, j: usize, d: f64) {
        for (k, &v) in self.nonzero[j].iter().enumerate() {
            self.rest[i][v] += d * self.x[j][v];
            self.log_norm[i][v] = self.buf_a[k];
        }
        for (k, &v) in self.nonzero[i].iter().enumerate() {
            self.rest[j][v] += d * self.x[i][v];
            self.log_norm[j][v] = self.buf_b[k];
        }
    }

    fn log_slab(&self, w: f64) -> f64 {
        let s = self.prior.slab_scale;
        -(s * s + w * w).ln()
    }

    fn update_weight(&mut self, i: usize, j: usize) -> bool {
        let old = self.state.theta(i, j);
        let z: f64 = self.rng.sample(StandardNormal);
        let new = old + self.edge_step[self.edge_index[i * self.p + j]].scale() * z;
        let log_ratio = self.edge_delta(i, j, new - old) + self.log_slab(new) - self.log_slab(old);
        if !accept(log_ratio, &mut self.rng) {
            return false;
        }
        self.commit(i, j, new - old);
        self.state.set_edge(i, j, new);
        true
    }

    fn update_indicator(&mut self, i: usize, j: usize) {
        let prior_odds = (self.prior.inclusion_prob / (1.0 - self.prior.inclusion_prob)).ln();
        if self.state.is_included(i, j) {
            let old = self.state.theta(i, j);
            let log_ratio = self.edge_delta(i, j, -old) - prior_odds;
            if accept(log_ratio, &mut self.rng) {
                self.commit(i, j, -old);
                self.state.remove_edge(i, j);
            }
        } else {
            let new = self.slab.sample(&mut self.rng);
            let log_ratio = self.edge_delta(i, j, new) + prior_odds;
            if accept(log_ratio, &mut self.rng) {
                self.commit(i, j, new);
                self.state.set_edge(i, j, new);
            }
        }
    }
}
