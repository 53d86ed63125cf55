//! Descriptive layer: Mood's median test across subgroups, Likert
//! distribution tables, and significance stars.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;
use statrs::function::gamma::gamma_ur;

use crate::error::{Error, Result};
use crate::survey::{CovariateColumn, SurveyDataset};

/// Outcome of Mood's median test over `k` groups.
///
/// The contingency table has one row of counts at or below the pooled
/// median and one row above it, with one column per group in ascending
/// label order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MedianTestResult<L> {
    pub groups: Vec<L>,
    pub pooled_median: f64,
    pub at_or_below: Vec<usize>,
    pub above: Vec<usize>,
    pub chi_square: f64,
    pub df: usize,
    pub p_value: f64,
    /// One classification row is empty, so the statistic is undefined;
    /// reported as `chi_square = 0`, `p_value = 1`.
    pub degenerate: bool,
}

impl<L> MedianTestResult<L> {
    pub fn group_size(&self, g: usize) -> usize {
        self.at_or_below[g] + self.above[g]
    }

    pub fn total(&self) -> usize {
        self.at_or_below.iter().sum::<usize>() + self.above.iter().sum::<usize>()
    }
}

/// Mood's median test: classify every observation against the pooled median
/// (ties count as "at or below") and run an uncorrected Pearson chi-square
/// on the resulting `2 × k` table with `k − 1` degrees of freedom.
///
/// Missing (`None` or NaN) scores are discarded along with their labels.
pub fn mood_median_test<L: Ord + Clone>(scores: &[Option<f64>], groups: &[L]) -> Result<MedianTestResult<L>> {
    if scores.len() != groups.len() {
        return Err(Error::InvalidParams(format!(
            "{} scores but {} group labels",
            scores.len(),
            groups.len()
        )));
    }
    let mut by_group: BTreeMap<&L, Vec<f64>> = BTreeMap::new();
    for (s, g) in scores.iter().zip(groups) {
        if let Some(x) = s.filter(|x| !x.is_nan()) {
            by_group.entry(g).or_default().push(x);
        }
    }
    let k = by_group.len();
    if k < 2 {
        return Err(Error::SingleGroup(k));
    }

    let mut pooled: Vec<f64> = by_group.values().flatten().copied().collect();
    pooled.sort_by(f64::total_cmp);
    let n = pooled.len();
    let median = if n % 2 == 1 {
        pooled[n / 2]
    } else {
        let (a, b) = (pooled[n / 2 - 1], pooled[n / 2]);
        a + (b - a) / 2.0
    };

    let mut at_or_below = Vec::with_capacity(k);
    let mut above = Vec::with_capacity(k);
    for values in by_group.values() {
        let low = values.iter().filter(|&&x| x <= median).count();
        at_or_below.push(low);
        above.push(values.len() - low);
    }
    let labels = by_group.keys().map(|&l| l.clone()).collect();

    let row_low: usize = at_or_below.iter().sum();
    let row_high = n - row_low;
    let degenerate = row_low == 0 || row_high == 0;
    let (chi_square, p_value) = if degenerate {
        (0.0, 1.0)
    } else {
        let nf = n as f64;
        let mut stat = 0.0;
        for g in 0..k {
            let col = (at_or_below[g] + above[g]) as f64;
            for (observed, row_total) in [(at_or_below[g], row_low), (above[g], row_high)] {
                let expected = row_total as f64 * col / nf;
                let d = observed as f64 - expected;
                stat += d * d / expected;
            }
        }
        (stat, chi_square_sf(stat, k - 1))
    };

    Ok(MedianTestResult {
        groups: labels,
        pooled_median: median,
        at_or_below,
        above,
        chi_square,
        df: k - 1,
        p_value,
        degenerate,
    })
}

/// Upper tail `P(X > x)` of a chi-square with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: usize) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_ur(df as f64 / 2.0, x / 2.0).clamp(0.0, 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Stars {
    None,
    One,
    Two,
    Three,
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stars::None => "",
            Stars::One => "*",
            Stars::Two => "**",
            Stars::Three => "***",
        })
    }
}

/// `***` below 0.001, `**` below 0.01, `*` below 0.05.
pub fn significance_stars(p: f64) -> Result<Stars> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Domain(format!("p-value {p} outside [0, 1]")));
    }
    Ok(if p < 0.001 {
        Stars::Three
    } else if p < 0.01 {
        Stars::Two
    } else if p < 0.05 {
        Stars::One
    } else {
        Stars::None
    })
}

/// Category distribution of one item, overall or within one covariate level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LikertSummary {
    pub item: String,
    pub group: Option<String>,
    pub n: usize,
    pub counts: Vec<usize>,
    pub proportions: Vec<f64>,
    /// Share of answers strictly below the scale midpoint.
    pub low: f64,
    /// Share of answers strictly above the scale midpoint.
    pub high: f64,
}

impl LikertSummary {
    fn from_counts(item: &str, group: Option<String>, counts: Vec<usize>) -> Self {
        let n: usize = counts.iter().sum();
        let h = counts.len();
        let proportions: Vec<f64> = counts.iter().map(|&c| c as f64 / n as f64).collect();
        // categories are 1-based: h is "low" when 2h < H + 1
        let low = proportions
            .iter()
            .enumerate()
            .filter(|(c, _)| 2 * (c + 1) < h + 1)
            .map(|(_, p)| p)
            .sum();
        let high = proportions
            .iter()
            .enumerate()
            .filter(|(c, _)| 2 * (c + 1) > h + 1)
            .map(|(_, p)| p)
            .sum();
        Self {
            item: item.to_string(),
            group,
            n,
            counts,
            proportions,
            low,
            high,
        }
    }
}

/// Distribution of `item` over non-missing answers, one summary per level
/// of `by` (levels with no answers are skipped) or a single overall one.
pub fn likert_summary(ds: &SurveyDataset, item: &str, by: Option<&str>) -> Result<Vec<LikertSummary>> {
    let j = ds
        .codebook()
        .item_index(item)
        .ok_or_else(|| Error::UnknownItem(item.to_string()))?;
    let h = ds.codebook().items[j].n_categories;
    let tally = |rows: &mut dyn Iterator<Item = usize>| {
        let mut counts = vec![0usize; h];
        for r in rows {
            if let Some(v) = ds.response(r, j) {
                counts[v as usize - 1] += 1;
            }
        }
        counts
    };
    let Some(name) = by else {
        let counts = tally(&mut (0..ds.n_rows()));
        if counts.iter().sum::<usize>() == 0 {
            return Ok(Vec::new());
        }
        return Ok(vec![LikertSummary::from_counts(item, None, counts)]);
    };
    let (def, col) = ds.covariate(name)?;
    let mut out = Vec::new();
    match col {
        CovariateColumn::Levels(levels) => {
            for (l, label) in def.levels.iter().enumerate() {
                let counts = tally(&mut (0..ds.n_rows()).filter(|&r| levels[r] == Some(l)));
                if counts.iter().sum::<usize>() > 0 {
                    out.push(LikertSummary::from_counts(item, Some(label.clone()), counts));
                }
            }
        }
        CovariateColumn::Numeric(values) => {
            let mut distinct: Vec<f64> = values.iter().flatten().copied().collect();
            distinct.sort_by(f64::total_cmp);
            distinct.dedup();
            for v in distinct {
                let counts = tally(&mut (0..ds.n_rows()).filter(|&r| values[r] == Some(v)));
                if counts.iter().sum::<usize>() > 0 {
                    out.push(LikertSummary::from_counts(item, Some(v.to_string()), counts));
                }
            }
        }
    }
    Ok(out)
}

/// Mood's median test of `item` scores across the levels of covariate `by`.
pub fn item_median_test(ds: &SurveyDataset, item: &str, by: &str) -> Result<MedianTestResult<String>> {
    let j = ds
        .codebook()
        .item_index(item)
        .ok_or_else(|| Error::UnknownItem(item.to_string()))?;
    let (def, col) = ds.covariate(by)?;
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for r in 0..ds.n_rows() {
        let label = match col {
            CovariateColumn::Levels(v) => v[r].map(|l| def.levels[l].clone()),
            CovariateColumn::Numeric(v) => v[r].map(|x| x.to_string()),
        };
        if let Some(label) = label {
            scores.push(ds.response(r, j).map(f64::from));
            labels.push(label);
        }
    }
    mood_median_test(&scores, &labels)
}
