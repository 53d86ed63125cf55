//! Synthetic data with known ground truth, and a brute-force MRF oracle.
//!
//! Every generator draws from [`rng::stream`]`(seed, SIMULATION_STREAM)`, so
//! a spec plus its seed pins the output exactly.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grm::{category_prob, GrmParams};
use crate::mrf::{conditional_distribution, MrfState};
use crate::rng::{self, Rng, SIMULATION_STREAM};
use crate::survey::{Codebook, CovariateColumn, CovariateDef, CovariateMatrix, ItemDef, OrdinalMatrix, SurveyDataset};

/// Joint tables larger than this are refused.
pub const MAX_CONFIGURATIONS: f64 = 1e6;
/// Up to this many configurations [`gen_mrf`] samples the exact joint.
pub const EXACT_SAMPLING_LIMIT: usize = 65_536;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimItem {
    pub name: String,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum CovariateDist {
    /// 0/1 with `P(1) = p`; stored as a binary covariate with levels "0", "1".
    Bernoulli { p: f64 },
    Normal { mean: f64, sd: f64 },
    Fixed { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimCovariate {
    pub name: String,
    #[serde(flatten)]
    pub dist: CovariateDist,
}

/// Ground truth for [`gen_grm`]. `delta` lists `δ_1..δ_{H−1}` with
/// `δ_1 = 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrmSimSpec {
    pub seed: u64,
    pub n: usize,
    pub n_categories: usize,
    pub items: Vec<SimItem>,
    pub delta: Vec<f64>,
    #[serde(default)]
    pub covariates: Vec<SimCovariate>,
    #[serde(default)]
    pub alpha: Vec<f64>,
}

impl GrmSimSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::json("GRM simulation spec", e))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(2..=255).contains(&self.n_categories) {
            return bad(format!("n_categories = {} outside 2..=255", self.n_categories));
        }
        if self.delta.len() != self.n_categories - 1 {
            return bad(format!("{} offsets for {} categories", self.delta.len(), self.n_categories));
        }
        if self.items.is_empty() {
            return bad("at least one item is required".into());
        }
        if let Some(it) = self.items.iter().find(|it| !(it.gamma > 0.0 && it.gamma.is_finite()) || !it.beta.is_finite()) {
            return bad(format!("item {} needs finite beta and positive gamma", it.name));
        }
        if self.alpha.len() != self.covariates.len() {
            return bad(format!("{} weights for {} covariates", self.alpha.len(), self.covariates.len()));
        }
        for c in &self.covariates {
            let ok = match c.dist {
                CovariateDist::Bernoulli { p } => (0.0..=1.0).contains(&p),
                CovariateDist::Normal { mean, sd } => mean.is_finite() && sd >= 0.0 && sd.is_finite(),
                CovariateDist::Fixed { value } => value.is_finite(),
            };
            if !ok {
                return bad(format!("covariate {} has an invalid distribution", c.name));
            }
        }
        self.truth(Vec::new()).validate().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Codebook::new(self.codebook_items(), self.codebook_covariates())
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        Ok(())
    }

    fn truth(&self, theta: Vec<f64>) -> GrmParams {
        GrmParams {
            theta,
            beta: self.items.iter().map(|it| it.beta).collect(),
            log_gamma: self.items.iter().map(|it| it.gamma.ln()).collect(),
            delta: self.delta.clone(),
            alpha: self.alpha.clone(),
        }
    }

    fn codebook_items(&self) -> Vec<ItemDef> {
        self.items.iter().map(|it| ItemDef::numbered(&it.name, self.n_categories)).collect()
    }

    fn codebook_covariates(&self) -> Vec<CovariateDef> {
        self.covariates
            .iter()
            .map(|c| match c.dist {
                CovariateDist::Bernoulli { .. } => CovariateDef::binary(&c.name, ["0", "1"]),
                _ => CovariateDef::numeric(&c.name),
            })
            .collect()
    }

    pub fn covariate_names(&self) -> Vec<String> {
        self.covariates.iter().map(|c| c.name.clone()).collect()
    }
}

#[derive(Clone, Debug)]
pub struct GrmSimulation {
    pub dataset: SurveyDataset,
    /// Covariates exactly as used for `θ_i ~ N(x_iᵀα, 1)` (not centered).
    pub design: CovariateMatrix,
    pub truth: GrmParams,
}

/// Draws `x_i`, then `θ_i ~ N(x_iᵀα, 1)`, then every response from
/// [`category_prob`].
pub fn gen_grm(spec: &GrmSimSpec) -> Result<GrmSimulation> {
    spec.validate()?;
    let mut rng = rng::stream(spec.seed, SIMULATION_STREAM);
    let (n, k) = (spec.n, spec.covariates.len());
    let mut x = vec![0.0; n * k];
    for i in 0..n {
        for (c, cov) in spec.covariates.iter().enumerate() {
            x[i * k + c] = match cov.dist {
                CovariateDist::Bernoulli { p } => (rng.random::<f64>() < p) as u8 as f64,
                CovariateDist::Normal { mean, sd } => mean + sd * rng.sample::<f64, _>(StandardNormal),
                CovariateDist::Fixed { value } => value,
            };
        }
    }
    let theta: Vec<f64> = (0..n)
        .map(|i| {
            let eta: f64 = (0..k).map(|c| x[i * k + c] * spec.alpha[c]).sum();
            eta + rng.sample::<f64, _>(StandardNormal)
        })
        .collect();
    let truth = spec.truth(theta);
    let rows = gen_grm_responses(&truth, &mut rng)?;

    let codebook = Codebook::new(spec.codebook_items(), spec.codebook_covariates())?;
    let columns = spec
        .covariates
        .iter()
        .enumerate()
        .map(|(c, cov)| {
            let values = (0..n).map(|i| x[i * k + c]);
            match cov.dist {
                CovariateDist::Bernoulli { .. } => CovariateColumn::Levels(values.map(|v| Some(v as usize)).collect()),
                _ => CovariateColumn::Numeric(values.map(Some).collect()),
            }
        })
        .collect();
    let rows = rows.into_iter().map(|r| r.into_iter().map(|y| Some(y + 1)).collect()).collect();
    let dataset = SurveyDataset::new(codebook, rows, columns)?;
    let design = CovariateMatrix::new(spec.covariate_names(), n, x)?;
    Ok(GrmSimulation { dataset, design, truth })
}

/// Responses for fixed parameters, 0-based (`h − 1`), one row per `θ_i`.
pub fn gen_grm_responses(params: &GrmParams, rng: &mut Rng) -> Result<Vec<Vec<u8>>> {
    params.validate()?;
    let n_cat = params.n_categories();
    let mut probs = vec![0.0; n_cat];
    let mut rows = Vec::with_capacity(params.theta.len());
    for &theta in &params.theta {
        let mut row = Vec::with_capacity(params.beta.len());
        for j in 0..params.beta.len() {
            for (h, p) in probs.iter_mut().enumerate() {
                *p = category_prob(theta, params.gamma(j), params.beta[j], &params.delta, h + 1)?;
            }
            row.push(draw_categorical(&probs, rng) as u8);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn draw_categorical(probs: &[f64], rng: &mut Rng) -> usize {
    let u: f64 = rng.random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    for (c, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return c;
        }
    }
    // Rounding can leave u at the very top; fall back to the last category
    // with positive mass.
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimVariable {
    pub name: String,
    pub n_categories: usize,
    /// `μ_{i,1}..μ_{i,m}`; omitted means all zero.
    #[serde(default)]
    pub thresholds: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimEdge {
    pub a: String,
    pub b: String,
    pub theta: f64,
}

/// Burn-in and spacing (in sweeps) of the Gibbs fallback in [`gen_mrf`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GibbsSettings {
    pub burn_in: usize,
    pub spacing: usize,
}

impl Default for GibbsSettings {
    fn default() -> Self {
        Self {
            burn_in: 1000,
            spacing: 10,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MrfSimSpec {
    pub seed: u64,
    pub n: usize,
    pub variables: Vec<SimVariable>,
    #[serde(default)]
    pub edges: Vec<SimEdge>,
    #[serde(default)]
    pub gibbs: GibbsSettings,
}

impl MrfSimSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::json("MRF simulation spec", e))?;
        spec.state()?;
        Ok(spec)
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    pub fn state(&self) -> Result<MrfState> {
        let invalid = |e: Error| Error::InvalidConfig(e.to_string());
        let mut state = MrfState::new(self.variables.iter().map(|v| v.n_categories).collect()).map_err(invalid)?;
        let names = self.names();
        if let Some(dup) = names.iter().enumerate().find(|(i, n)| names[..*i].contains(n)) {
            return Err(Error::InvalidConfig(format!("variable {} listed twice", dup.1)));
        }
        for (i, v) in self.variables.iter().enumerate() {
            if !v.thresholds.is_empty() {
                state.set_thresholds(i, v.thresholds.clone()).map_err(invalid)?;
            }
        }
        let index = |name: &str| {
            names
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::InvalidConfig(format!("edge names unknown variable {name}")))
        };
        for e in &self.edges {
            let (a, b) = (index(&e.a)?, index(&e.b)?);
            if a == b || !e.theta.is_finite() {
                return Err(Error::InvalidConfig(format!("invalid edge {}-{}", e.a, e.b)));
            }
            state.set_edge(a, b, e.theta);
        }
        if self.gibbs.spacing == 0 {
            return Err(Error::InvalidConfig("Gibbs spacing must be at least 1".into()));
        }
        Ok(state)
    }
}

/// Exact normalized joint over every configuration. Configurations are
/// indexed mixed-radix with the last variable varying fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct JointTable {
    n_categories: Vec<usize>,
    probs: Vec<f64>,
}

impl JointTable {
    pub fn n_categories(&self) -> &[usize] {
        &self.n_categories
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn index(&self, x: &[u8]) -> usize {
        x.iter().zip(&self.n_categories).fold(0, |acc, (&v, &c)| acc * c + v as usize)
    }

    pub fn configuration(&self, mut index: usize) -> Vec<u8> {
        let mut x = vec![0u8; self.n_categories.len()];
        for (v, &c) in x.iter_mut().zip(&self.n_categories).rev() {
            *v = (index % c) as u8;
            index /= c;
        }
        x
    }

    pub fn prob(&self, x: &[u8]) -> f64 {
        self.probs[self.index(x)]
    }

    /// `p(x_i = · | x_−i)` by renormalizing the joint along variable `i`.
    pub fn conditional(&self, x: &[u8], i: usize) -> Vec<f64> {
        let mut y = x.to_vec();
        let mut out: Vec<f64> = (0..self.n_categories[i])
            .map(|c| {
                y[i] = c as u8;
                self.prob(&y)
            })
            .collect();
        let total: f64 = out.iter().sum();
        out.iter_mut().for_each(|p| *p /= total);
        out
    }

    pub fn marginal(&self, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n_categories[i]];
        for (k, &p) in self.probs.iter().enumerate() {
            out[self.configuration(k)[i] as usize] += p;
        }
        out
    }

    /// `table[a][b] = p(x_i = a, x_j = b)`.
    pub fn pair_marginal(&self, i: usize, j: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.n_categories[j]]; self.n_categories[i]];
        for (k, &p) in self.probs.iter().enumerate() {
            let x = self.configuration(k);
            out[x[i] as usize][x[j] as usize] += p;
        }
        out
    }
}

pub fn n_configurations(state: &MrfState) -> f64 {
    state.n_categories().iter().map(|&c| c as f64).product()
}

/// Brute-force `p(x) ∝ exp(Σ μ_{i,x_i} + Σ_{i<j} θ_ij x_i x_j)`.
pub fn enumerate_mrf_joint(state: &MrfState) -> Result<JointTable> {
    let configurations = n_configurations(state);
    if configurations > MAX_CONFIGURATIONS {
        return Err(Error::TooLarge {
            configurations,
            cap: MAX_CONFIGURATIONS,
        });
    }
    let mut table = JointTable {
        n_categories: state.n_categories().to_vec(),
        probs: vec![0.0; configurations as usize],
    };
    let log_pot: Vec<f64> = (0..table.len())
        .map(|k| state.log_potential(&table.configuration(k)))
        .collect();
    let top = log_pot.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for (p, lp) in table.probs.iter_mut().zip(&log_pot) {
        *p = (lp - top).exp();
        total += *p;
    }
    table.probs.iter_mut().for_each(|p| *p /= total);
    Ok(table)
}

/// `n` independent rows from the MRF: sampled from the exact joint when it
/// has at most [`EXACT_SAMPLING_LIMIT`] configurations, otherwise by a
/// single-site Gibbs chain started at zero with the default
/// [`GibbsSettings`].
pub fn gen_mrf(state: &MrfState, n: usize, seed: u64) -> Result<OrdinalMatrix> {
    gen_mrf_with(state, n, seed, GibbsSettings::default())
}

pub fn gen_mrf_with(state: &MrfState, n: usize, seed: u64, gibbs: GibbsSettings) -> Result<OrdinalMatrix> {
    state.validate()?;
    let mut rng = rng::stream(seed, SIMULATION_STREAM);
    let p = state.p();
    let mut values = Vec::with_capacity(n * p);
    if n_configurations(state) <= EXACT_SAMPLING_LIMIT as f64 {
        let table = enumerate_mrf_joint(state)?;
        for _ in 0..n {
            let k = draw_categorical(table.probs(), &mut rng);
            values.extend(table.configuration(k));
        }
    } else {
        let mut x = vec![0u8; p];
        let sweep = |x: &mut Vec<u8>, rng: &mut Rng| -> Result<()> {
            for i in 0..p {
                let probs: Vec<f64> = conditional_distribution(state, x, i)?.iter().map(|l| l.exp()).collect();
                x[i] = draw_categorical(&probs, rng) as u8;
            }
            Ok(())
        };
        for _ in 0..gibbs.burn_in {
            sweep(&mut x, &mut rng)?;
        }
        for _ in 0..n {
            for _ in 0..gibbs.spacing.max(1) {
                sweep(&mut x, &mut rng)?;
            }
            values.extend_from_slice(&x);
        }
    }
    let names = (1..=p).map(|i| format!("V{i}")).collect();
    OrdinalMatrix::new(names, state.n_categories().to_vec(), values)
}

/// [`gen_mrf_with`] for a spec, with the spec's variable names.
pub fn gen_mrf_spec(spec: &MrfSimSpec) -> Result<OrdinalMatrix> {
    let state = spec.state()?;
    let m = gen_mrf_with(&state, spec.n, spec.seed, spec.gibbs)?;
    OrdinalMatrix::new(spec.names(), m.n_categories().to_vec(), m.values().to_vec())
}

/// Wraps 0-based MRF data as a survey dataset with numbered categories.
pub fn mrf_dataset(data: &OrdinalMatrix) -> Result<SurveyDataset> {
    let items = data
        .names()
        .iter()
        .zip(data.n_categories())
        .map(|(n, &c)| ItemDef::numbered(n, c))
        .collect();
    let codebook = Codebook::new(items, Vec::new())?;
    let rows = data.rows().map(|r| r.iter().map(|&v| Some(v + 1)).collect()).collect();
    SurveyDataset::new(codebook, rows, Vec::new())
}

/// Maps simulated columns onto an existing codebook by name: items take
/// category `v + 1`, binary and categorical covariates take level `v`.
/// Every codebook column must be simulated with a matching category count.
pub fn dataset_with_codebook(data: &OrdinalMatrix, codebook: &Codebook) -> Result<SurveyDataset> {
    let column = |name: &str, n_cat: usize| -> Result<usize> {
        let j = data
            .names()
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::InvalidConfig(format!("codebook column {name} is not simulated")))?;
        if data.n_categories()[j] != n_cat {
            return Err(Error::InvalidConfig(format!(
                "{name} is simulated with {} categories, codebook has {n_cat}",
                data.n_categories()[j]
            )));
        }
        Ok(j)
    };
    let items = codebook
        .items
        .iter()
        .map(|it| column(&it.abbr, it.n_categories))
        .collect::<Result<Vec<_>>>()?;
    let rows = data.rows().map(|r| items.iter().map(|&j| Some(r[j] + 1)).collect()).collect();
    let covariates = codebook
        .covariates
        .iter()
        .map(|c| {
            if c.kind == crate::survey::CovariateKind::Numeric {
                return Err(Error::InvalidConfig(format!("numeric covariate {} cannot be simulated by the MRF", c.name)));
            }
            let j = column(&c.name, c.levels.len())?;
            Ok(CovariateColumn::Levels(data.column(j).map(|v| Some(v as usize)).collect()))
        })
        .collect::<Result<Vec<_>>>()?;
    SurveyDataset::new(codebook.clone(), rows, covariates)
}
