use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{gelman_rubin, GrmParams, GrmPrior};
use crate::error::{Error, Result};
use crate::mcmc::{McmcConfig, Summary};
use crate::output::fmt_f64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamKind {
    Theta,
    Beta,
    Gamma,
    Delta,
    Alpha,
}

/// Posterior summary of one scalar. Discriminations are summarized on the
/// `γ` scale, not `log γ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSummary {
    pub name: String,
    pub kind: ParamKind,
    /// Respondent, item, offset or covariate index (0-based).
    pub index: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `None` with a single chain or when every draw is identical.
    pub rhat: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GrmPosterior {
    item_names: Vec<String>,
    covariate_names: Vec<String>,
    n_categories: usize,
    prior: GrmPrior,
    config: McmcConfig,
    chains: Vec<Vec<GrmParams>>,
    summaries: Vec<ParamSummary>,
}

impl GrmPosterior {
    pub fn from_chains(
        item_names: Vec<String>,
        covariate_names: Vec<String>,
        n_categories: usize,
        prior: GrmPrior,
        config: McmcConfig,
        chains: Vec<Vec<GrmParams>>,
    ) -> Result<Self> {
        if chains.is_empty() || chains[0].is_empty() || chains.iter().any(|c| c.len() != chains[0].len()) {
            return Err(Error::InvalidParams("posterior needs equal, non-empty chains".into()));
        }
        let mut post = Self {
            item_names,
            covariate_names,
            n_categories,
            prior,
            config,
            chains,
            summaries: Vec::new(),
        };
        post.summaries = post.scalars().map(|(name, kind, index)| post.summarize(name, kind, index)).collect();
        Ok(post)
    }

    fn scalars(&self) -> impl Iterator<Item = (String, ParamKind, usize)> + '_ {
        let n = self.chains[0][0].theta.len();
        let theta = (0..n).map(|i| (format!("theta[{}]", i + 1), ParamKind::Theta, i));
        let beta = self.item_names.iter().enumerate().map(|(j, s)| (format!("beta[{s}]"), ParamKind::Beta, j));
        let gamma = self.item_names.iter().enumerate().map(|(j, s)| (format!("gamma[{s}]"), ParamKind::Gamma, j));
        let delta = (1..self.n_categories - 1).map(|h| (format!("delta[{}]", h + 1), ParamKind::Delta, h));
        let alpha = self
            .covariate_names
            .iter()
            .enumerate()
            .map(|(k, s)| (format!("alpha[{s}]"), ParamKind::Alpha, k));
        theta.chain(beta).chain(gamma).chain(delta).chain(alpha)
    }

    fn extract(kind: ParamKind, index: usize, p: &GrmParams) -> f64 {
        match kind {
            ParamKind::Theta => p.theta[index],
            ParamKind::Beta => p.beta[index],
            ParamKind::Gamma => p.log_gamma[index].exp(),
            ParamKind::Delta => p.delta[index],
            ParamKind::Alpha => p.alpha[index],
        }
    }

    /// Draws of one scalar, chain by chain.
    pub fn chain_values(&self, kind: ParamKind, index: usize) -> Vec<Vec<f64>> {
        self.chains
            .iter()
            .map(|c| c.iter().map(|p| Self::extract(kind, index, p)).collect())
            .collect()
    }

    /// Draws of one scalar pooled in chain order.
    pub fn pooled(&self, kind: ParamKind, index: usize) -> Vec<f64> {
        self.chain_values(kind, index).concat()
    }

    fn summarize(&self, name: String, kind: ParamKind, index: usize) -> ParamSummary {
        let per_chain = self.chain_values(kind, index);
        let pooled = per_chain.concat();
        let s = Summary::of(&pooled).expect("non-empty chains");
        let rhat = if per_chain.len() > 1 {
            gelman_rubin(&per_chain).ok()
        } else {
            None
        };
        ParamSummary {
            name,
            kind,
            index,
            mean: s.mean,
            sd: s.sd,
            ci_low: s.ci_low,
            ci_high: s.ci_high,
            rhat,
        }
    }

    pub fn item_names(&self) -> &[String] {
        &self.item_names
    }

    pub fn covariate_names(&self) -> &[String] {
        &self.covariate_names
    }

    pub fn n_categories(&self) -> usize {
        self.n_categories
    }

    pub fn n_respondents(&self) -> usize {
        self.chains[0][0].theta.len()
    }

    pub fn prior(&self) -> &GrmPrior {
        &self.prior
    }

    pub fn config(&self) -> &McmcConfig {
        &self.config
    }

    pub fn chains(&self) -> &[Vec<GrmParams>] {
        &self.chains
    }

    pub fn summaries(&self) -> &[ParamSummary] {
        &self.summaries
    }

    pub fn summary(&self, name: &str) -> Option<&ParamSummary> {
        self.summaries.iter().find(|s| s.name == name)
    }

    pub fn of_kind(&self, kind: ParamKind) -> impl Iterator<Item = &ParamSummary> {
        self.summaries.iter().filter(move |s| s.kind == kind)
    }

    /// Largest finite R̂ over every monitored scalar.
    pub fn max_rhat(&self) -> Option<f64> {
        self.summaries.iter().filter_map(|s| s.rhat).fold(None, |acc, r| {
            Some(acc.map_or(r, |a: f64| a.max(r)))
        })
    }

    /// Offsets and item parameters rebuilt from posterior means; `δ_1 = 0`.
    pub fn mean_params(&self) -> GrmParams {
        let means = |kind| self.of_kind(kind).map(|s| s.mean).collect::<Vec<_>>();
        let mut delta = vec![0.0];
        delta.extend(means(ParamKind::Delta));
        GrmParams {
            theta: means(ParamKind::Theta),
            beta: means(ParamKind::Beta),
            log_gamma: means(ParamKind::Gamma).iter().map(|g| g.ln()).collect(),
            delta,
            alpha: means(ParamKind::Alpha),
        }
    }

    /// `parameter,mean,sd,ci_low,ci_high,rhat` for every non-θ scalar.
    pub fn write_params_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_summaries(writer, self.summaries.iter().filter(|s| s.kind != ParamKind::Theta), "parameter")
    }

    /// One row per respondent (1-based, in data order).
    pub fn write_theta_csv<W: Write>(&self, writer: W) -> Result<()> {
        write_summaries(writer, self.of_kind(ParamKind::Theta), "respondent")
    }

    /// Items ranked by discrimination.
    pub fn write_items_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["rank", "item", "gamma_mean", "gamma_ci_low", "gamma_ci_high", "beta_mean"])?;
        for r in rank_discrimination(self) {
            w.write_record([
                r.rank.to_string(),
                r.item.clone(),
                fmt_f64(r.gamma_mean),
                fmt_f64(r.gamma_ci_low),
                fmt_f64(r.gamma_ci_high),
                fmt_f64(r.beta_mean),
            ])?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }

    /// Every retained draw of every scalar, `γ` on its natural scale.
    pub fn write_draws_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let scalars: Vec<_> = self.scalars().collect();
        let mut header = vec!["chain".to_string(), "draw".to_string()];
        header.extend(scalars.iter().map(|s| s.0.clone()));
        w.write_record(&header)?;
        for (c, chain) in self.chains.iter().enumerate() {
            for (k, p) in chain.iter().enumerate() {
                let mut rec = vec![(c + 1).to_string(), k.to_string()];
                rec.extend(scalars.iter().map(|&(_, kind, i)| fmt_f64(Self::extract(kind, i, p))));
                w.write_record(&rec)?;
            }
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

fn write_summaries<'a, W: Write>(
    writer: W,
    rows: impl Iterator<Item = &'a ParamSummary>,
    first: &str,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([first, "mean", "sd", "ci_low", "ci_high", "rhat"])?;
    for s in rows {
        let label = if s.kind == ParamKind::Theta {
            (s.index + 1).to_string()
        } else {
            s.name.clone()
        };
        w.write_record([
            label,
            fmt_f64(s.mean),
            fmt_f64(s.sd),
            fmt_f64(s.ci_low),
            fmt_f64(s.ci_high),
            s.rhat.map(fmt_f64).unwrap_or_default(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemRank {
    /// 1 = most discriminating.
    pub rank: usize,
    pub item: String,
    pub gamma_mean: f64,
    pub gamma_ci_low: f64,
    pub gamma_ci_high: f64,
    pub beta_mean: f64,
}

/// Items by descending posterior mean discrimination; ties keep item order.
pub fn rank_discrimination(post: &GrmPosterior) -> Vec<ItemRank> {
    let gammas: Vec<&ParamSummary> = post.of_kind(ParamKind::Gamma).collect();
    let betas: Vec<&ParamSummary> = post.of_kind(ParamKind::Beta).collect();
    let mut order: Vec<usize> = (0..gammas.len()).collect();
    order.sort_by(|&a, &b| gammas[b].mean.total_cmp(&gammas[a].mean).then(a.cmp(&b)));
    order
        .into_iter()
        .enumerate()
        .map(|(r, j)| ItemRank {
            rank: r + 1,
            item: post.item_names[j].clone(),
            gamma_mean: gammas[j].mean,
            gamma_ci_low: gammas[j].ci_low,
            gamma_ci_high: gammas[j].ci_high,
            beta_mean: betas[j].mean,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariateEffect {
    pub covariate: String,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Share of draws with `α_k > 0`.
    pub prob_positive: f64,
}

impl CovariateEffect {
    /// Posterior probability of the sign of the posterior mean.
    pub fn prob_direction(&self) -> f64 {
        if self.mean >= 0.0 {
            self.prob_positive
        } else {
            1.0 - self.prob_positive
        }
    }

    pub fn interval_excludes_zero(&self) -> bool {
        self.ci_low > 0.0 || self.ci_high < 0.0
    }
}

pub fn covariate_effects(post: &GrmPosterior) -> Vec<CovariateEffect> {
    post.of_kind(ParamKind::Alpha)
        .map(|s| {
            let draws = post.pooled(ParamKind::Alpha, s.index);
            let positive = draws.iter().filter(|&&a| a > 0.0).count();
            CovariateEffect {
                covariate: post.covariate_names[s.index].clone(),
                mean: s.mean,
                sd: s.sd,
                ci_low: s.ci_low,
                ci_high: s.ci_high,
                prob_positive: positive as f64 / draws.len() as f64,
            }
        })
        .collect()
}
