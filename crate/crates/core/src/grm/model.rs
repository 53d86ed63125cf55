use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::survey::OrdinalMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrmParams {
    pub theta: Vec<f64>,
    pub beta: Vec<f64>,
    pub log_gamma: Vec<f64>,
    /// Category offsets `δ_1..δ_{H−1}`, `δ_1 = 0`.
    pub delta: Vec<f64>,
    pub alpha: Vec<f64>,
}

impl GrmParams {
    /// Sampler starting point: `θ = β = log γ = α = 0`, `δ_h = h − 1`.
    pub fn initial(n: usize, n_items: usize, n_categories: usize, n_covariates: usize) -> Self {
        Self {
            theta: vec![0.0; n],
            beta: vec![0.0; n_items],
            log_gamma: vec![0.0; n_items],
            delta: (0..n_categories - 1).map(|h| h as f64).collect(),
            alpha: vec![0.0; n_covariates],
        }
    }

    pub fn n_categories(&self) -> usize {
        self.delta.len() + 1
    }

    pub fn gamma(&self, j: usize) -> f64 {
        self.log_gamma[j].exp()
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta.is_empty() {
            return Err(Error::InvalidParams("at least two categories are required".into()));
        }
        if self.delta[0] != 0.0 {
            return Err(Error::InvalidParams("the first category offset must be 0".into()));
        }
        check_offsets(&self.delta, 0)?;
        if self.beta.len() != self.log_gamma.len() {
            return Err(Error::InvalidParams("one discrimination per difficulty is required".into()));
        }
        let all = self
            .theta
            .iter()
            .chain(&self.beta)
            .chain(&self.log_gamma)
            .chain(&self.alpha);
        if all.into_iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite parameter".into()));
        }
        Ok(())
    }
}

fn check_offsets(delta: &[f64], item: usize) -> Result<()> {
    if delta.iter().any(|d| !d.is_finite()) || delta.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::MonotonicityViolation { item });
    }
    Ok(())
}

#[inline]
fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[inline]
fn log_logistic(x: f64) -> f64 {
    // −softplus(−x)
    -((-x).max(0.0) + (-x.abs()).exp().ln_1p())
}

/// `P(Y ≥ h) = logistic(γ (θ − β_jh))`.
pub fn cumulative_prob(theta: f64, gamma: f64, beta_jh: f64) -> f64 {
    logistic(gamma * (theta - beta_jh))
}

/// `P(Y = h) = P(Y ≥ h) − P(Y ≥ h + 1)` with `P(Y ≥ 1) = 1` and
/// `P(Y ≥ H + 1) = 0`, where `H = delta.len() + 1`.
pub fn category_prob(theta: f64, gamma: f64, beta: f64, delta: &[f64], h: usize) -> Result<f64> {
    check_category(gamma, delta, h)?;
    let n_cat = delta.len() + 1;
    let upper = if h == 1 {
        1.0
    } else {
        cumulative_prob(theta, gamma, beta + delta[h - 2])
    };
    let lower = if h == n_cat {
        0.0
    } else {
        cumulative_prob(theta, gamma, beta + delta[h - 1])
    };
    Ok(upper - lower)
}

fn check_category(gamma: f64, delta: &[f64], h: usize) -> Result<()> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParams(format!("discrimination {gamma} must be positive")));
    }
    check_offsets(delta, 0)?;
    if h == 0 || h > delta.len() + 1 {
        return Err(Error::Domain(format!("category {h} outside 1..={}", delta.len() + 1)));
    }
    Ok(())
}

/// Numerically stable `log P(Y = h)`.
pub fn log_category_prob(theta: f64, gamma: f64, beta: f64, delta: &[f64], h: usize) -> Result<f64> {
    check_category(gamma, delta, h)?;
    Ok(log_cell(theta, gamma, beta, delta, h - 1))
}

/// Unchecked `log P(Y = y + 1)` for a 0-based category `y`.
#[inline]
pub(crate) fn log_cell(theta: f64, gamma: f64, beta: f64, delta: &[f64], y: usize) -> f64 {
    let top = delta.len();
    if y == 0 {
        log_logistic(-gamma * (theta - beta - delta[0]))
    } else if y == top {
        log_logistic(gamma * (theta - beta - delta[top - 1]))
    } else {
        let a = gamma * (theta - beta - delta[y - 1]);
        let b = gamma * (theta - beta - delta[y]);
        log_logistic(a) + log_logistic(-b) + (-(-(a - b)).exp_m1()).ln()
    }
}

/// `Σ_i Σ_j log P(Y_ij)` for complete 0-based data (category `h` stored as
/// `h − 1`).
pub fn loglik(params: &GrmParams, data: &OrdinalMatrix) -> Result<f64> {
    params.validate()?;
    if data.n_rows() != params.theta.len() || data.n_cols() != params.beta.len() {
        return Err(Error::InvalidParams(format!(
            "data is {} × {}, parameters are for {} × {}",
            data.n_rows(),
            data.n_cols(),
            params.theta.len(),
            params.beta.len()
        )));
    }
    if data.n_categories().iter().any(|&c| c != params.n_categories()) {
        return Err(Error::InvalidParams("every item must have H categories".into()));
    }
    let mut total = 0.0;
    for (i, row) in data.rows().enumerate() {
        for (j, &y) in row.iter().enumerate() {
            total += log_cell(params.theta[i], params.gamma(j), params.beta[j], &params.delta, y as usize);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn cumulative_examples() {
        assert_eq!(cumulative_prob(0.3, 1.7, 0.3), 0.5);
        assert_abs_diff_eq!(cumulative_prob(3f64.ln(), 1.0, 0.0), 0.75, epsilon = 1e-15);
        assert!(cumulative_prob(0.1, 1.0, 0.0) < cumulative_prob(0.2, 1.0, 0.0));
        assert_eq!(cumulative_prob(1e4, 5.0, 0.0), 1.0);
        assert_eq!(cumulative_prob(-1e4, 5.0, 0.0), 0.0);
    }

    #[test]
    fn two_categories_reduce_to_2pl() {
        let p2 = category_prob(0.4, 1.3, -0.2, &[0.0], 2).unwrap();
        assert_abs_diff_eq!(p2, logistic(1.3 * 0.6), epsilon = 1e-15);
        let p1 = category_prob(0.4, 1.3, -0.2, &[0.0], 1).unwrap();
        assert_abs_diff_eq!(p1, 1.0 - p2, epsilon = 1e-15);
    }

    #[test]
    fn four_category_example() {
        let expected = [0.5, 0.2310585786300049, 0.14973849934787756, 0.11920292202211755];
        for (h, e) in (1..=4).zip(expected) {
            let p = category_prob(0.0, 1.0, 0.0, &[0.0, 1.0, 2.0], h).unwrap();
            assert_abs_diff_eq!(p, e, epsilon = 1e-12);
        }
    }

    #[test]
    fn rejects_unordered_offsets() {
        assert!(matches!(
            category_prob(0.0, 1.0, 0.0, &[0.0, 1.0, 1.0], 2),
            Err(Error::MonotonicityViolation { .. })
        ));
        assert!(category_prob(0.0, 0.0, 0.0, &[0.0, 1.0], 2).is_err());
        assert!(category_prob(0.0, 1.0, 0.0, &[0.0, 1.0], 4).is_err());
    }

    #[test]
    fn single_cell_coin_flip() {
        let params = GrmParams {
            theta: vec![0.7],
            beta: vec![0.7],
            log_gamma: vec![0.4],
            delta: vec![0.0],
            alpha: vec![],
        };
        let data = OrdinalMatrix::from_rows(vec![2], &[vec![1]]).unwrap();
        assert_abs_diff_eq!(loglik(&params, &data).unwrap(), 0.5f64.ln(), epsilon = 1e-15);
    }

    #[test]
    fn moving_to_a_less_likely_category_lowers_loglik() {
        let params = GrmParams {
            theta: vec![1.5, -0.5],
            beta: vec![0.0, 0.3],
            log_gamma: vec![0.2, -0.1],
            delta: vec![0.0, 0.8, 1.6],
            alpha: vec![],
        };
        let base = OrdinalMatrix::from_rows(vec![4; 2], &[vec![2, 1], vec![0, 1]]).unwrap();
        let ll = loglik(&params, &base).unwrap();
        let (g, b) = (params.gamma(0), params.beta[0]);
        let p_now = category_prob(1.5, g, b, &params.delta, 3).unwrap();
        let p_new = category_prob(1.5, g, b, &params.delta, 1).unwrap();
        assert!(p_new < p_now);
        let moved = OrdinalMatrix::from_rows(vec![4; 2], &[vec![0, 1], vec![0, 1]]).unwrap();
        let ll_moved = loglik(&params, &moved).unwrap();
        assert!(ll_moved < ll);
        assert_abs_diff_eq!(ll - ll_moved, (p_now / p_new).ln(), epsilon = 1e-12);
    }

    fn valid_offsets() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(0.05f64..2.0, 1..6).prop_map(|gaps| {
            let mut d = vec![0.0];
            for g in gaps.iter().skip(1) {
                d.push(d.last().unwrap() + g);
            }
            d
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn probabilities_telescope(theta in -4.0f64..4.0, log_gamma in -1.5f64..1.5, beta in -3.0f64..3.0, delta in valid_offsets()) {
            let gamma = log_gamma.exp();
            let n_cat = delta.len() + 1;
            let probs: Vec<f64> = (1..=n_cat).map(|h| category_prob(theta, gamma, beta, &delta, h).unwrap()).collect();
            prop_assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for h in 1..=n_cat {
                prop_assert!(probs[h - 1] >= 0.0);
                let log_p = log_category_prob(theta, gamma, beta, &delta, h).unwrap();
                prop_assert!((log_p.exp() - probs[h - 1]).abs() < 1e-12);
            }
        }

        #[test]
        fn exceedance_increases_with_trait(log_gamma in -1.0f64..1.0, beta in -2.0f64..2.0, delta in valid_offsets()) {
            let gamma = log_gamma.exp();
            let n_cat = delta.len() + 1;
            let mut prev = vec![0.0; n_cat];
            for step in 0..=40 {
                let theta = -5.0 + 0.25 * step as f64;
                let probs: Vec<f64> = (1..=n_cat).map(|h| category_prob(theta, gamma, beta, &delta, h).unwrap()).collect();
                for h in 0..n_cat {
                    let tail: f64 = probs[h..].iter().sum();
                    prop_assert!(tail >= prev[h] - 1e-12);
                    prev[h] = tail;
                }
            }
        }
    }

    #[test]
    fn item_relabeling_leaves_loglik_unchanged() {
        let params = GrmParams {
            theta: vec![0.2, -1.0, 0.9],
            beta: vec![-0.5, 0.1],
            log_gamma: vec![0.3, -0.2],
            delta: vec![0.0, 1.0, 1.7],
            alpha: vec![],
        };
        let rows = vec![vec![0, 3], vec![1, 1], vec![3, 2]];
        let data = OrdinalMatrix::from_rows(vec![4; 2], &rows).unwrap();
        let swapped_params = GrmParams {
            beta: vec![0.1, -0.5],
            log_gamma: vec![-0.2, 0.3],
            ..params.clone()
        };
        let swapped = data.select_columns(&[1, 0]);
        assert_abs_diff_eq!(
            loglik(&params, &data).unwrap(),
            loglik(&swapped_params, &swapped).unwrap(),
            epsilon = 1e-12
        );
    }
}
