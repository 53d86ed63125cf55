use serde::{Deserialize, Serialize};

use super::SurveyDataset;
use crate::error::{Error, Result};

/// Row-level consistency rules. Each rule is independent; a row failing
/// several is attributed to the first in the order all-missing, any-missing,
/// straight-lining.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CleaningPolicy {
    /// Drop rows where every item is missing.
    pub drop_all_missing: bool,
    /// Drop rows with at least one missing item.
    pub drop_any_missing: bool,
    /// Drop rows whose modal category covers at least this share of the
    /// answered items. Only rows with two or more answers are considered.
    pub max_straightline: Option<f64>,
}

impl Default for CleaningPolicy {
    /// Complete cases only, no straight-lining rule.
    fn default() -> Self {
        Self {
            drop_all_missing: true,
            drop_any_missing: true,
            max_straightline: None,
        }
    }
}

impl CleaningPolicy {
    /// No rules; cleaning is the identity.
    pub fn permissive() -> Self {
        Self {
            drop_all_missing: false,
            drop_any_missing: false,
            max_straightline: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(t) = self.max_straightline {
            if !(t > 0.0 && t <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "straight-lining threshold {t} must lie in (0, 1]"
                )));
            }
        }
        Ok(())
    }

    fn violation(&self, row: &[Option<u8>]) -> Option<Rule> {
        let answered: Vec<u8> = row.iter().flatten().copied().collect();
        if self.drop_all_missing && answered.is_empty() {
            return Some(Rule::AllMissing);
        }
        if self.drop_any_missing && answered.len() < row.len() {
            return Some(Rule::AnyMissing);
        }
        if let Some(threshold) = self.max_straightline {
            if answered.len() >= 2 {
                let mut counts = [0usize; 256];
                for &v in &answered {
                    counts[v as usize] += 1;
                }
                let modal = *counts.iter().max().unwrap();
                if modal as f64 / answered.len() as f64 >= threshold {
                    return Some(Rule::Straightline);
                }
            }
        }
        None
    }
}

#[derive(Clone, Copy)]
enum Rule {
    AllMissing,
    AnyMissing,
    Straightline,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CleaningReport {
    pub input_rows: usize,
    pub output_rows: usize,
    pub all_missing: usize,
    pub missing: usize,
    pub straightline: usize,
    /// Set when no rows survive.
    pub empty: bool,
}

impl CleaningReport {
    pub fn removed(&self) -> usize {
        self.all_missing + self.missing + self.straightline
    }
}

pub fn clean(ds: &SurveyDataset, policy: &CleaningPolicy) -> Result<(SurveyDataset, CleaningReport)> {
    policy.validate()?;
    let mut report = CleaningReport {
        input_rows: ds.n_rows(),
        ..Default::default()
    };
    let mut keep = Vec::with_capacity(ds.n_rows());
    for r in 0..ds.n_rows() {
        match policy.violation(ds.row(r)) {
            None => keep.push(r),
            Some(Rule::AllMissing) => report.all_missing += 1,
            Some(Rule::AnyMissing) => report.missing += 1,
            Some(Rule::Straightline) => report.straightline += 1,
        }
    }
    report.output_rows = keep.len();
    report.empty = keep.is_empty();
    Ok((ds.select_rows(&keep), report))
}
