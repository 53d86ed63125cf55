use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grm::{CovariateEffect, ItemRank};
use crate::mrf::RetainedEdge;

pub const SUMMARY_FILE: &str = "summary.json";

/// Machine-readable digest each fit leaves in its run directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "lowercase")]
pub enum RunSummary {
    Mrf(MrfSummary),
    Grm(GrmSummary),
}

impl RunSummary {
    pub fn items(&self) -> &[String] {
        match self {
            RunSummary::Mrf(s) => &s.items,
            RunSummary::Grm(s) => &s.items,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MrfSummary {
    pub items: Vec<String>,
    pub covariates: Vec<String>,
    pub nodes: Vec<String>,
    pub n_rows: usize,
    pub rows_dropped: usize,
    pub bf_threshold: f64,
    /// Median probability graph.
    pub edges: Vec<RetainedEdge>,
    /// Connected components of its conclusive edges.
    pub clusters: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrmSummary {
    pub items: Vec<String>,
    /// Design columns, dummies expanded.
    pub covariates: Vec<String>,
    pub n_rows: usize,
    pub rows_dropped: usize,
    pub max_rhat: Option<f64>,
    pub ranking: Vec<ItemRank>,
    pub effects: Vec<CovariateEffect>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub items: Vec<String>,
    pub mrf: Option<MrfSummary>,
    pub grm: Option<GrmSummary>,
}

/// Merges at most one MRF and one GRM summary fitted to the same items.
pub fn build_report(runs: Vec<RunSummary>) -> Result<Report> {
    if runs.is_empty() {
        return Err(Error::InvalidConfig("report needs at least one run".into()));
    }
    let reference: BTreeSet<&String> = runs[0].items().iter().collect();
    for run in &runs[1..] {
        let other: BTreeSet<&String> = run.items().iter().collect();
        if other != reference {
            let diff = reference.symmetric_difference(&other).map(|s| s.to_string()).collect();
            return Err(Error::IncompatibleRuns(diff));
        }
    }
    let items = runs[0].items().to_vec();
    let (mut mrf, mut grm) = (None, None);
    for run in runs {
        match run {
            RunSummary::Mrf(s) if mrf.is_none() => mrf = Some(s),
            RunSummary::Grm(s) if grm.is_none() => grm = Some(s),
            _ => return Err(Error::InvalidConfig("report takes at most one run per model".into())),
        }
    }
    Ok(Report { items, mrf, grm })
}

impl Report {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Items: {}", self.items.join(", "));
        out.push_str("\nNetwork (ordinal MRF)\n");
        match &self.mrf {
            None => out.push_str("  absent\n"),
            Some(m) => {
                let _ = writeln!(
                    out,
                    "  {} nodes, {} rows, {} edges in the median probability graph (BF10 threshold {})",
                    m.nodes.len(),
                    m.n_rows,
                    m.edges.len(),
                    m.bf_threshold
                );
                out.push_str("  conclusive clusters:\n");
                for (k, c) in m.clusters.iter().filter(|c| c.len() > 1).enumerate() {
                    let _ = writeln!(out, "    {}. {}", k + 1, c.join(", "));
                }
                let _ = writeln!(out, "  {:<10} {:<10} {:>8} {:>10} {:>9} evidence", "node_a", "node_b", "incl", "bf10", "theta");
                for e in &m.edges {
                    let bf = if e.bf10_saturated { ">1e6".to_string() } else { format!("{:.2}", e.bf10) };
                    let _ = writeln!(
                        out,
                        "  {:<10} {:<10} {:>8.3} {:>10} {:>9.3} {}",
                        e.node_a,
                        e.node_b,
                        e.inclusion_prob,
                        bf,
                        e.theta_mean,
                        if e.conclusive { "conclusive" } else { "inconclusive" }
                    );
                }
            }
        }
        out.push_str("\nLatent trait (graded response model)\n");
        match &self.grm {
            None => out.push_str("  absent\n"),
            Some(g) => {
                let rhat = g.max_rhat.map(|r| format!("{r:.3}")).unwrap_or_else(|| "n/a".into());
                let _ = writeln!(out, "  {} rows, max R-hat {rhat}", g.n_rows);
                let _ = writeln!(out, "  {:>4} {:<10} {:>8} {:>17} {:>8}", "rank", "item", "gamma", "95% interval", "beta");
                for r in &g.ranking {
                    let _ = writeln!(
                        out,
                        "  {:>4} {:<10} {:>8.3} [{:>6.3}, {:>6.3}] {:>8.3}",
                        r.rank, r.item, r.gamma_mean, r.gamma_ci_low, r.gamma_ci_high, r.beta_mean
                    );
                }
                if !g.effects.is_empty() {
                    let _ = writeln!(out, "  {:<12} {:>8} {:>17} {:>8}", "covariate", "alpha", "95% interval", "P(>0)");
                    for e in &g.effects {
                        let _ = writeln!(
                            out,
                            "  {:<12} {:>8.3} [{:>6.3}, {:>6.3}] {:>8.3}",
                            e.covariate, e.mean, e.ci_low, e.ci_high, e.prob_positive
                        );
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mrf(items: &[&str]) -> RunSummary {
        RunSummary::Mrf(MrfSummary {
            items: items.iter().map(|s| s.to_string()).collect(),
            covariates: vec![],
            nodes: items.iter().map(|s| s.to_string()).collect(),
            n_rows: 10,
            rows_dropped: 0,
            bf_threshold: 10.0,
            edges: vec![],
            clusters: vec![],
        })
    }

    fn grm(items: &[&str]) -> RunSummary {
        RunSummary::Grm(GrmSummary {
            items: items.iter().map(|s| s.to_string()).collect(),
            covariates: vec![],
            n_rows: 10,
            rows_dropped: 0,
            max_rhat: Some(1.01),
            ranking: vec![],
            effects: vec![],
        })
    }

    #[test]
    fn merges_both_sections() {
        let r = build_report(vec![mrf(&["A", "B"]), grm(&["B", "A"])]).unwrap();
        assert!(r.mrf.is_some() && r.grm.is_some());
    }

    #[test]
    fn marks_missing_section() {
        let r = build_report(vec![mrf(&["A", "B"])]).unwrap();
        assert!(r.grm.is_none());
        assert!(r.render_text().contains("absent"));
    }

    #[test]
    fn names_symmetric_difference() {
        let err = build_report(vec![mrf(&["A", "B", "C"]), grm(&["A", "B", "D"])]).unwrap_err();
        match err {
            Error::IncompatibleRuns(d) => assert_eq!(d, ["C", "D"]),
            e => panic!("{e}"),
        }
    }
}
