use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const DEMO_CODEBOOK: &str = include_str!("../../data/demo_codebook.json");

/// Thematic block of the questionnaire an item belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Section {
    GenderRoles,
    SexualViolence,
    RelationshipDynamics,
    ToxicBehaviors,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemDef {
    pub abbr: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub section: Option<Section>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    pub n_categories: usize,
    pub category_labels: Vec<String>,
}

impl ItemDef {
    /// Item with categories labelled `1..=n_categories`.
    pub fn numbered(abbr: impl Into<String>, n_categories: usize) -> Self {
        Self {
            abbr: abbr.into(),
            section: None,
            text: None,
            n_categories,
            category_labels: (1..=n_categories).map(|h| h.to_string()).collect(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovariateKind {
    Binary,
    Categorical,
    Numeric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariateDef {
    pub name: String,
    pub kind: CovariateKind,
    #[serde(default)]
    pub levels: Vec<String>,
}

impl CovariateDef {
    pub fn binary(name: impl Into<String>, levels: [&str; 2]) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Binary,
            levels: levels.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn numeric(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Numeric,
            levels: Vec::new(),
        }
    }
}

/// Column dictionary of a survey file: ordinal items first, then respondent
/// covariates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Codebook {
    pub items: Vec<ItemDef>,
    #[serde(default)]
    pub covariates: Vec<CovariateDef>,
}

impl Codebook {
    pub fn new(items: Vec<ItemDef>, covariates: Vec<CovariateDef>) -> Result<Self> {
        let cb = Self { items, covariates };
        cb.validate()?;
        Ok(cb)
    }

    /// The sixteen trigger items of the violence-against-women attitude
    /// questionnaire with its socio-demographic covariates.
    pub fn demo() -> Self {
        Self::from_json(DEMO_CODEBOOK).expect("bundled codebook is valid")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cb: Codebook = serde_json::from_str(text).map_err(|e| Error::json("codebook", e))?;
        cb.validate()?;
        Ok(cb)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("codebook serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for item in &self.items {
            if item.abbr.trim().is_empty() {
                return Err(Error::InvalidCodebook("empty item abbreviation".into()));
            }
            if !seen.insert(item.abbr.as_str()) {
                return Err(Error::InvalidCodebook(format!("duplicate column {}", item.abbr)));
            }
            if item.n_categories < 2 {
                return Err(Error::InvalidCodebook(format!(
                    "item {} needs at least 2 categories",
                    item.abbr
                )));
            }
            if item.n_categories > u8::MAX as usize {
                return Err(Error::InvalidCodebook(format!(
                    "item {} has too many categories",
                    item.abbr
                )));
            }
            if item.category_labels.len() != item.n_categories {
                return Err(Error::InvalidCodebook(format!(
                    "item {} declares {} categories but {} labels",
                    item.abbr,
                    item.n_categories,
                    item.category_labels.len()
                )));
            }
        }
        for cov in &self.covariates {
            if cov.name.trim().is_empty() {
                return Err(Error::InvalidCodebook("empty covariate name".into()));
            }
            if !seen.insert(cov.name.as_str()) {
                return Err(Error::InvalidCodebook(format!("duplicate column {}", cov.name)));
            }
            let ok = match cov.kind {
                CovariateKind::Binary => cov.levels.len() == 2,
                CovariateKind::Categorical => cov.levels.len() >= 2,
                CovariateKind::Numeric => cov.levels.is_empty(),
            };
            if !ok {
                return Err(Error::InvalidCodebook(format!(
                    "covariate {} of kind {:?} has {} levels",
                    cov.name,
                    cov.kind,
                    cov.levels.len()
                )));
            }
            let distinct: HashSet<_> = cov.levels.iter().collect();
            if distinct.len() != cov.levels.len() {
                return Err(Error::InvalidCodebook(format!(
                    "covariate {} repeats a level",
                    cov.name
                )));
            }
        }
        Ok(())
    }

    pub fn item_index(&self, abbr: &str) -> Option<usize> {
        self.items.iter().position(|i| i.abbr == abbr)
    }

    pub fn covariate_index(&self, name: &str) -> Option<usize> {
        self.covariates.iter().position(|c| c.name == name)
    }

    pub fn item_abbrs(&self) -> Vec<String> {
        self.items.iter().map(|i| i.abbr.clone()).collect()
    }

    /// All column names in file order.
    pub fn columns(&self) -> Vec<&str> {
        self.items
            .iter()
            .map(|i| i.abbr.as_str())
            .chain(self.covariates.iter().map(|c| c.name.as_str()))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_has_sixteen_four_point_items() {
        let cb = Codebook::demo();
        assert_eq!(cb.items.len(), 16);
        assert!(cb.items.iter().all(|i| i.n_categories == 4));
        for section in [
            Section::GenderRoles,
            Section::SexualViolence,
            Section::RelationshipDynamics,
            Section::ToxicBehaviors,
        ] {
            let count = cb.items.iter().filter(|i| i.section == Some(section)).count();
            assert_eq!(count, 4, "{section:?}");
        }
        let names: Vec<_> = cb.covariates.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["G", "AG", "EduF", "EduM", "JbF", "JbM"]);
    }

    #[test]
    fn rejects_duplicate_abbreviation() {
        let items = vec![ItemDef::numbered("MRC", 4), ItemDef::numbered("MRC", 4)];
        assert!(matches!(Codebook::new(items, vec![]), Err(Error::InvalidCodebook(_))));
    }

    #[test]
    fn rejects_label_count_mismatch() {
        let mut item = ItemDef::numbered("MRC", 4);
        item.category_labels.pop();
        assert!(Codebook::new(vec![item], vec![]).is_err());
    }

    #[test]
    fn binary_needs_two_levels() {
        let cov = CovariateDef {
            name: "G".into(),
            kind: CovariateKind::Binary,
            levels: vec!["f".into(), "m".into(), "x".into()],
        };
        assert!(Codebook::new(vec![ItemDef::numbered("A", 2)], vec![cov]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cb = Codebook::demo();
        assert_eq!(Codebook::from_json(&cb.to_json()).unwrap(), cb);
    }
}
