use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{MrfPrior, MrfState};
use crate::error::{Error, Result};
use crate::mcmc::{self, McmcConfig, Summary};
use crate::output::fmt_f64;

/// Reported inclusion Bayes factor when the posterior never excluded an
/// edge (or the odds exceed it).
pub const BF_CAP: f64 = 1e6;

/// Inclusion Bayes factor: posterior inclusion odds over prior inclusion
/// odds. `posterior = 1` yields `+∞`.
pub fn inclusion_bf10(posterior: f64, prior: f64) -> Result<f64> {
    if !(prior > 0.0 && prior < 1.0) {
        return Err(Error::Domain(format!("prior inclusion probability {prior} must lie in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&posterior) {
        return Err(Error::Domain(format!(
            "posterior inclusion probability {posterior} must lie in [0, 1]"
        )));
    }
    if posterior == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((posterior / (1.0 - posterior)) / (prior / (1.0 - prior)))
}

/// [`inclusion_bf10`] for a posterior inclusion frequency of
/// `included / total` draws. The posterior odds are formed from the integer
/// counts, so e.g. 10 of 11 draws against a prior of 0.5 gives exactly 10.
pub fn inclusion_bf10_counts(included: usize, total: usize, prior: f64) -> Result<f64> {
    if total == 0 || included > total {
        return Err(Error::Domain(format!("{included} of {total} draws is not a frequency")));
    }
    inclusion_bf10(0.5, prior)?;
    if included == total {
        return Ok(f64::INFINITY);
    }
    Ok((included as f64 / (total - included) as f64) / (prior / (1.0 - prior)))
}

/// One retained sweep: edge weights and indicators in upper-triangle order
/// `(0,1), (0,2), …, (p-2,p-1)`, thresholds variable by variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MrfDraw {
    pub theta: Vec<f64>,
    pub included: Vec<bool>,
    pub thresholds: Vec<f64>,
}

impl MrfDraw {
    pub fn from_state(state: &MrfState) -> Self {
        let (theta, included) = state
            .edges()
            .map(|(i, j)| (state.theta(i, j), state.is_included(i, j)))
            .unzip();
        let thresholds = (0..state.p()).flat_map(|i| state.thresholds(i).iter().copied()).collect();
        Self {
            theta,
            included,
            thresholds,
        }
    }

    pub fn to_state(&self, n_categories: &[usize]) -> Result<MrfState> {
        let mut state = MrfState::new(n_categories.to_vec())?;
        let p = state.p();
        let mut k = 0;
        for i in 0..p {
            for j in i + 1..p {
                if self.included[k] {
                    state.set_edge(i, j, self.theta[k]);
                }
                k += 1;
            }
        }
        let mut offset = 0;
        for (i, &c) in n_categories.iter().enumerate() {
            state.set_thresholds(i, self.thresholds[offset..offset + c - 1].to_vec())?;
            offset += c - 1;
        }
        Ok(state)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeSummary {
    pub a: usize,
    pub b: usize,
    pub inclusion_prob: f64,
    /// Capped at [`BF_CAP`].
    pub bf10: f64,
    pub bf10_saturated: bool,
    /// Mean weight over draws that include the edge (zero if none do).
    pub theta_mean: f64,
    /// Mean weight over all draws, excluded ones counting as zero.
    pub theta_mean_unconditional: f64,
    pub theta_sd: f64,
    /// Equal-tailed 95% interval over the including draws.
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MrfPosterior {
    names: Vec<String>,
    n_categories: Vec<usize>,
    prior: MrfPrior,
    config: McmcConfig,
    draws: Vec<MrfDraw>,
    edges: Vec<EdgeSummary>,
}

impl MrfPosterior {
    /// Pools draws (chain after chain) and derives the edge summaries.
    pub fn from_draws(
        names: Vec<String>,
        n_categories: Vec<usize>,
        prior: MrfPrior,
        config: McmcConfig,
        draws: Vec<MrfDraw>,
    ) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::InvalidParams("posterior needs at least one draw".into()));
        }
        let p = n_categories.len();
        if names.len() != p {
            return Err(Error::InvalidParams("one name per variable is required".into()));
        }
        let n_edges = p * (p.saturating_sub(1)) / 2;
        if draws.iter().any(|d| d.theta.len() != n_edges || d.included.len() != n_edges) {
            return Err(Error::InvalidParams("draw has the wrong number of edges".into()));
        }
        let total = draws.len() as f64;
        let mut edges = Vec::with_capacity(n_edges);
        let mut k = 0;
        for a in 0..p {
            for b in a + 1..p {
                let weights: Vec<f64> = draws.iter().filter(|d| d.included[k]).map(|d| d.theta[k]).collect();
                let inclusion_prob = weights.len() as f64 / total;
                let raw = inclusion_bf10_counts(weights.len(), draws.len(), prior.inclusion_prob)?;
                let summary = Summary::of(&weights).unwrap_or(Summary {
                    mean: 0.0,
                    sd: 0.0,
                    ci_low: 0.0,
                    ci_high: 0.0,
                });
                edges.push(EdgeSummary {
                    a,
                    b,
                    inclusion_prob,
                    bf10: raw.min(BF_CAP),
                    bf10_saturated: raw >= BF_CAP,
                    theta_mean: summary.mean,
                    theta_mean_unconditional: weights.iter().sum::<f64>() / total,
                    theta_sd: summary.sd,
                    ci_low: summary.ci_low,
                    ci_high: summary.ci_high,
                });
                k += 1;
            }
        }
        Ok(Self {
            names,
            n_categories,
            prior,
            config,
            draws,
            edges,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_categories(&self) -> &[usize] {
        &self.n_categories
    }

    pub fn p(&self) -> usize {
        self.n_categories.len()
    }

    pub fn prior(&self) -> &MrfPrior {
        &self.prior
    }

    pub fn config(&self) -> &McmcConfig {
        &self.config
    }

    pub fn draws(&self) -> &[MrfDraw] {
        &self.draws
    }

    pub fn draw_state(&self, k: usize) -> Result<MrfState> {
        self.draws[k].to_state(&self.n_categories)
    }

    pub fn edges(&self) -> &[EdgeSummary] {
        &self.edges
    }

    pub fn edge(&self, i: usize, j: usize) -> &EdgeSummary {
        assert!(i != j);
        let (a, b) = if i < j { (i, j) } else { (j, i) };
        let p = self.p();
        let k = a * p - a * (a + 1) / 2 + (b - a - 1);
        &self.edges[k]
    }

    /// Symmetric `p × p` matrix of posterior inclusion probabilities.
    pub fn inclusion_matrix(&self) -> Vec<Vec<f64>> {
        self.matrix(|e| e.inclusion_prob)
    }

    pub fn bf10_matrix(&self) -> Vec<Vec<f64>> {
        self.matrix(|e| e.bf10)
    }

    pub fn theta_mean_matrix(&self) -> Vec<Vec<f64>> {
        self.matrix(|e| e.theta_mean)
    }

    fn matrix(&self, f: impl Fn(&EdgeSummary) -> f64) -> Vec<Vec<f64>> {
        let p = self.p();
        let mut m = vec![vec![0.0; p]; p];
        for e in &self.edges {
            m[e.a][e.b] = f(e);
            m[e.b][e.a] = f(e);
        }
        m
    }

    /// Posterior mean of each threshold, variable by variable.
    pub fn threshold_means(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let mut offset = 0;
        for &c in &self.n_categories {
            out.push(
                (offset..offset + c - 1)
                    .map(|k| mcmc::mean(&self.draws.iter().map(|d| d.thresholds[k]).collect::<Vec<_>>()))
                    .collect(),
            );
            offset += c - 1;
        }
        out
    }

    /// Writes every retained draw: one `theta[a,b]` column per edge (zero
    /// when excluded) followed by one `mu[v,c]` column per threshold.
    pub fn write_draws_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["draw".to_string()];
        header.extend(self.edges.iter().map(|e| format!("theta[{},{}]", self.names[e.a], self.names[e.b])));
        for (i, &c) in self.n_categories.iter().enumerate() {
            header.extend((1..c).map(|k| format!("mu[{},{k}]", self.names[i])));
        }
        w.write_record(&header)?;
        for (k, d) in self.draws.iter().enumerate() {
            let mut rec = vec![k.to_string()];
            rec.extend(d.theta.iter().map(|&t| fmt_f64(t)));
            rec.extend(d.thresholds.iter().map(|&t| fmt_f64(t)));
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::Csv(e.to_string()))?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeSign {
    Positive,
    Negative,
    Zero,
}

impl EdgeSign {
    fn of(x: f64) -> Self {
        if x > 0.0 {
            EdgeSign::Positive
        } else if x < 0.0 {
            EdgeSign::Negative
        } else {
            EdgeSign::Zero
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            EdgeSign::Positive => "positive",
            EdgeSign::Negative => "negative",
            EdgeSign::Zero => "zero",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetainedEdge {
    pub a: usize,
    pub b: usize,
    pub node_a: String,
    pub node_b: String,
    pub inclusion_prob: f64,
    pub bf10: f64,
    pub bf10_saturated: bool,
    pub theta_mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub sign: EdgeSign,
    /// `bf10 ≥ threshold`; inconclusive edges are drawn dashed.
    pub conclusive: bool,
}

/// Median probability graph: edges with posterior inclusion probability at
/// least 0.5, each flagged by whether its Bayes factor reaches the
/// evidence threshold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeReport {
    pub nodes: Vec<String>,
    pub bf_threshold: f64,
    pub edges: Vec<RetainedEdge>,
}

pub fn median_probability_graph(post: &MrfPosterior, bf_threshold: f64) -> Result<EdgeReport> {
    if !(bf_threshold > 0.0) {
        return Err(Error::InvalidConfig(format!("Bayes factor threshold {bf_threshold} must be positive")));
    }
    let edges = post
        .edges
        .iter()
        .filter(|e| e.inclusion_prob >= 0.5)
        .map(|e| RetainedEdge {
            a: e.a,
            b: e.b,
            node_a: post.names[e.a].clone(),
            node_b: post.names[e.b].clone(),
            inclusion_prob: e.inclusion_prob,
            bf10: e.bf10,
            bf10_saturated: e.bf10_saturated,
            theta_mean: e.theta_mean,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            sign: EdgeSign::of(e.theta_mean),
            conclusive: e.bf10 >= bf_threshold,
        })
        .collect();
    Ok(EdgeReport {
        nodes: post.names.clone(),
        bf_threshold,
        edges,
    })
}

impl EdgeReport {
    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.edges.iter().any(|e| (e.a, e.b) == (a.min(b), a.max(b)))
    }

    /// Connected components of the conclusive edges, each sorted by node
    /// index; isolated nodes form singletons.
    pub fn conclusive_clusters(&self) -> Vec<Vec<String>> {
        let p = self.nodes.len();
        let mut parent: Vec<usize> = (0..p).collect();
        fn find(parent: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while parent[r] != r {
                r = parent[r];
            }
            parent[x] = r;
            r
        }
        for e in self.edges.iter().filter(|e| e.conclusive) {
            let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_of = vec![usize::MAX; p];
        for v in 0..p {
            let r = find(&mut parent, v);
            if root_of[r] == usize::MAX {
                root_of[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[root_of[r]].push(v);
        }
        groups
            .into_iter()
            .map(|g| g.into_iter().map(|v| self.nodes[v].clone()).collect())
            .collect()
    }

    /// Graphviz rendering: blue positive and red negative edges, dashed
    /// when inconclusive, `weight` set to the posterior mean magnitude.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph mrf {\n");
        for node in &self.nodes {
            let _ = writeln!(out, "  \"{}\";", escape(node));
        }
        for e in &self.edges {
            let color = match e.sign {
                EdgeSign::Positive => "blue",
                EdgeSign::Negative => "red",
                EdgeSign::Zero => "gray",
            };
            let style = if e.conclusive { "solid" } else { "dashed" };
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\" [weight={}, theta={}, sign={}, color={color}, style={style}];",
                escape(&e.node_a),
                escape(&e.node_b),
                fmt_f64(e.theta_mean.abs()),
                fmt_f64(e.theta_mean),
                e.sign.as_str(),
            );
        }
        out.push_str("}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Writes one line per node pair with the edge summary and flags
/// `retained` (inclusion ≥ 0.5) and `conclusive` (retained and
/// BF₁₀ ≥ threshold).
pub fn write_edges_csv<W: Write>(post: &MrfPosterior, bf_threshold: f64, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "node_a",
        "node_b",
        "inclusion_prob",
        "bf10",
        "bf10_saturated",
        "theta_mean",
        "theta_mean_unconditional",
        "ci_low",
        "ci_high",
        "retained",
        "conclusive",
    ])?;
    for e in &post.edges {
        let retained = e.inclusion_prob >= 0.5;
        w.write_record([
            post.names[e.a].clone(),
            post.names[e.b].clone(),
            fmt_f64(e.inclusion_prob),
            fmt_f64(e.bf10),
            e.bf10_saturated.to_string(),
            fmt_f64(e.theta_mean),
            fmt_f64(e.theta_mean_unconditional),
            fmt_f64(e.ci_low),
            fmt_f64(e.ci_high),
            retained.to_string(),
            (retained && e.bf10 >= bf_threshold).to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
