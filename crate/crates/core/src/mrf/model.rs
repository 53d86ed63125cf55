use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey::OrdinalMatrix;

/// Parameters of an ordinal MRF over `p` variables.
///
/// Variable `i` takes scores `0..=m_i` where `m_i = n_categories[i] - 1`.
/// `theta` and the inclusion indicators are symmetric with a zero diagonal,
/// and an excluded edge always carries weight exactly zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MrfState {
    n_categories: Vec<usize>,
    theta: Vec<f64>,
    included: Vec<bool>,
    /// `thresholds[i][c - 1]` is `μ_{i,c}` for `c = 1..=m_i`.
    thresholds: Vec<Vec<f64>>,
}

impl MrfState {
    /// Empty graph with all thresholds zero.
    pub fn new(n_categories: Vec<usize>) -> Result<Self> {
        if let Some(i) = n_categories.iter().position(|&c| !(2..=256).contains(&c)) {
            return Err(Error::InvalidParams(format!(
                "variable {i} has {} categories, need 2..=256",
                n_categories[i]
            )));
        }
        let p = n_categories.len();
        Ok(Self {
            thresholds: n_categories.iter().map(|&c| vec![0.0; c - 1]).collect(),
            n_categories,
            theta: vec![0.0; p * p],
            included: vec![false; p * p],
        })
    }

    pub fn p(&self) -> usize {
        self.n_categories.len()
    }

    pub fn n_categories(&self) -> &[usize] {
        &self.n_categories
    }

    /// Highest score `m_i` of variable `i`.
    pub fn max_score(&self, i: usize) -> usize {
        self.n_categories[i] - 1
    }

    pub fn theta(&self, i: usize, j: usize) -> f64 {
        self.theta[i * self.p() + j]
    }

    pub fn is_included(&self, i: usize, j: usize) -> bool {
        self.included[i * self.p() + j]
    }

    /// Includes edge `i–j` with weight `weight`.
    pub fn set_edge(&mut self, i: usize, j: usize, weight: f64) {
        assert!(i != j, "self-loops are not allowed");
        let p = self.p();
        self.theta[i * p + j] = weight;
        self.theta[j * p + i] = weight;
        self.included[i * p + j] = true;
        self.included[j * p + i] = true;
    }

    pub fn remove_edge(&mut self, i: usize, j: usize) {
        let p = self.p();
        self.theta[i * p + j] = 0.0;
        self.theta[j * p + i] = 0.0;
        self.included[i * p + j] = false;
        self.included[j * p + i] = false;
    }

    pub fn thresholds(&self, i: usize) -> &[f64] {
        &self.thresholds[i]
    }

    /// `μ_{i,c}`, zero for the reference score `c = 0`.
    pub fn threshold(&self, i: usize, c: usize) -> f64 {
        if c == 0 {
            0.0
        } else {
            self.thresholds[i][c - 1]
        }
    }

    pub fn set_thresholds(&mut self, i: usize, values: Vec<f64>) -> Result<()> {
        if values.len() != self.max_score(i) {
            return Err(Error::InvalidParams(format!(
                "variable {i} needs {} thresholds, got {}",
                self.max_score(i),
                values.len()
            )));
        }
        self.thresholds[i] = values;
        Ok(())
    }

    pub(crate) fn set_threshold(&mut self, i: usize, c: usize, value: f64) {
        self.thresholds[i][c - 1] = value;
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let p = self.p();
        (0..p).flat_map(move |i| (i + 1..p).map(move |j| (i, j)))
    }

    pub fn n_included(&self) -> usize {
        self.edges().filter(|&(i, j)| self.is_included(i, j)).count()
    }

    /// `s_i = Σ_{j≠i} θ_ij x_j`.
    pub fn rest_score(&self, x: &[u8], i: usize) -> f64 {
        let p = self.p();
        let row = &self.theta[i * p..(i + 1) * p];
        row.iter()
            .zip(x)
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, (t, &xj))| t * xj as f64)
            .sum()
    }

    /// Unnormalized log joint `Σ_i μ_{i,x_i} + Σ_{i<j} θ_ij x_i x_j`.
    pub fn log_potential(&self, x: &[u8]) -> f64 {
        let mut total: f64 = (0..self.p()).map(|i| self.threshold(i, x[i] as usize)).sum();
        for (i, j) in self.edges() {
            total += self.theta(i, j) * x[i] as f64 * x[j] as f64;
        }
        total
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.p();
        for i in 0..p {
            if self.theta(i, i) != 0.0 || self.is_included(i, i) {
                return Err(Error::InvalidParams(format!("diagonal entry {i} must be empty")));
            }
            if self.thresholds[i].iter().any(|t| !t.is_finite()) {
                return Err(Error::InvalidParams(format!("non-finite threshold on variable {i}")));
            }
        }
        for (i, j) in self.edges() {
            if self.theta(i, j) != self.theta(j, i) || self.is_included(i, j) != self.is_included(j, i) {
                return Err(Error::InvalidParams(format!("edge {i}-{j} is not symmetric")));
            }
            if !self.is_included(i, j) && self.theta(i, j) != 0.0 {
                return Err(Error::InvalidParams(format!("excluded edge {i}-{j} has nonzero weight")));
            }
            if !self.theta(i, j).is_finite() {
                return Err(Error::InvalidParams(format!("non-finite weight on edge {i}-{j}")));
            }
        }
        Ok(())
    }

    fn check_configuration(&self, x: &[u8]) -> Result<()> {
        if x.len() != self.p() {
            return Err(Error::InvalidParams(format!(
                "configuration has {} entries, model has {} variables",
                x.len(),
                self.p()
            )));
        }
        if let Some(j) = (0..self.p()).find(|&j| x[j] as usize > self.max_score(j)) {
            return Err(Error::Domain(format!(
                "score {} of variable {j} exceeds {}",
                x[j],
                self.max_score(j)
            )));
        }
        Ok(())
    }
}

pub(crate) fn log_sum_exp(values: impl Iterator<Item = f64> + Clone) -> f64 {
    let max = values.clone().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + values.map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Log full conditional `log p(x_i = c | x_{-i})` for every `c = 0..=m_i`.
pub fn conditional_distribution(state: &MrfState, x: &[u8], i: usize) -> Result<Vec<f64>> {
    if i >= state.p() {
        return Err(Error::Domain(format!("variable index {i} out of range")));
    }
    state.check_configuration(x)?;
    let s = state.rest_score(x, i);
    let logits: Vec<f64> = (0..=state.max_score(i))
        .map(|c| state.threshold(i, c) + c as f64 * s)
        .collect();
    let norm = log_sum_exp(logits.iter().copied());
    Ok(logits.into_iter().map(|l| l - norm).collect())
}

/// `log p(x_i = c | x_{-i}) = μ_{i,c} + c s_i − log Σ_{c'} exp(μ_{i,c'} + c' s_i)`.
pub fn conditional_logprob(state: &MrfState, x: &[u8], i: usize, c: usize) -> Result<f64> {
    if i < state.p() && c > state.max_score(i) {
        return Err(Error::Domain(format!(
            "category {c} exceeds {} for variable {i}",
            state.max_score(i)
        )));
    }
    Ok(conditional_distribution(state, x, i)?[c])
}

/// Log pseudolikelihood: the sum over rows and variables of the observed
/// categories' full-conditional log probabilities.
pub fn pseudo_loglik(state: &MrfState, data: &OrdinalMatrix) -> Result<f64> {
    if data.n_categories() != state.n_categories() {
        return Err(Error::InvalidParams(
            "data category counts differ from the model's".into(),
        ));
    }
    let mut total = 0.0;
    for row in data.rows() {
        for i in 0..state.p() {
            total += conditional_logprob(state, row, i, row[i] as usize)?;
        }
    }
    Ok(total)
}
