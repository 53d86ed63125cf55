//! Survey data model: a respondent × item matrix of 1-based ordinal
//! responses with explicit missing cells, per-respondent covariates, and
//! the codebook describing both.

mod clean;
mod codebook;
mod csv_io;
mod matrix;

pub use clean::{clean, CleaningPolicy, CleaningReport};
pub use codebook::{Codebook, CovariateDef, CovariateKind, ItemDef, Section};
pub use csv_io::{load_csv, read_csv, write_csv};
pub use matrix::{CovariateMatrix, OrdinalMatrix};

use crate::error::{Error, Result};

/// One covariate column, typed by its [`CovariateKind`]. Binary and
/// categorical columns hold 0-based level indices into
/// [`CovariateDef::levels`].
#[derive(Clone, Debug, PartialEq)]
pub enum CovariateColumn {
    Levels(Vec<Option<usize>>),
    Numeric(Vec<Option<f64>>),
}

impl CovariateColumn {
    pub fn len(&self) -> usize {
        match self {
            CovariateColumn::Levels(v) => v.len(),
            CovariateColumn::Numeric(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_missing(&self, row: usize) -> bool {
        match self {
            CovariateColumn::Levels(v) => v[row].is_none(),
            CovariateColumn::Numeric(v) => v[row].is_none(),
        }
    }

    fn select(&self, rows: &[usize]) -> Self {
        match self {
            CovariateColumn::Levels(v) => CovariateColumn::Levels(rows.iter().map(|&r| v[r]).collect()),
            CovariateColumn::Numeric(v) => CovariateColumn::Numeric(rows.iter().map(|&r| v[r]).collect()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurveyDataset {
    codebook: Codebook,
    n_rows: usize,
    /// Row-major `n_rows × items`, categories `1..=H_j`, `None` when missing.
    responses: Vec<Option<u8>>,
    covariates: Vec<CovariateColumn>,
}

impl SurveyDataset {
    /// Builds a dataset from response rows and covariate columns, checking
    /// that every value fits the codebook.
    pub fn new(
        codebook: Codebook,
        rows: Vec<Vec<Option<u8>>>,
        covariates: Vec<CovariateColumn>,
    ) -> Result<Self> {
        codebook.validate()?;
        let n_items = codebook.items.len();
        let n_rows = rows.len();
        let mut responses = Vec::with_capacity(n_rows * n_items);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != n_items {
                return Err(Error::InvalidParams(format!(
                    "row {} has {} responses, codebook has {n_items} items",
                    r + 1,
                    row.len()
                )));
            }
            for (item, value) in codebook.items.iter().zip(&row) {
                if let Some(v) = *value {
                    if v < 1 || v as usize > item.n_categories {
                        return Err(Error::ValueOutOfRange {
                            row: r + 1,
                            column: item.abbr.clone(),
                            value: v.to_string(),
                        });
                    }
                }
            }
            responses.extend(row);
        }
        if covariates.len() != codebook.covariates.len() {
            return Err(Error::InvalidParams(format!(
                "{} covariate columns for {} codebook covariates",
                covariates.len(),
                codebook.covariates.len()
            )));
        }
        for (def, col) in codebook.covariates.iter().zip(&covariates) {
            if col.len() != n_rows {
                return Err(Error::InvalidParams(format!(
                    "covariate {} has {} rows, responses have {n_rows}",
                    def.name,
                    col.len()
                )));
            }
            match (def.kind, col) {
                (CovariateKind::Numeric, CovariateColumn::Numeric(_)) => {}
                (CovariateKind::Binary | CovariateKind::Categorical, CovariateColumn::Levels(v)) => {
                    if let Some(r) = v.iter().position(|x| matches!(x, Some(l) if *l >= def.levels.len())) {
                        return Err(Error::ValueOutOfRange {
                            row: r + 1,
                            column: def.name.clone(),
                            value: v[r].unwrap().to_string(),
                        });
                    }
                }
                _ => {
                    return Err(Error::InvalidParams(format!(
                        "covariate {} column does not match kind {:?}",
                        def.name, def.kind
                    )))
                }
            }
        }
        Ok(Self {
            codebook,
            n_rows,
            responses,
            covariates,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.codebook
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_items(&self) -> usize {
        self.codebook.items.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.len()
    }

    pub fn response(&self, row: usize, item: usize) -> Option<u8> {
        self.responses[row * self.n_items() + item]
    }

    pub fn row(&self, row: usize) -> &[Option<u8>] {
        let m = self.n_items();
        &self.responses[row * m..(row + 1) * m]
    }

    pub fn item_responses(&self, item: usize) -> impl Iterator<Item = Option<u8>> + '_ {
        (0..self.n_rows).map(move |r| self.response(r, item))
    }

    pub fn covariate_column(&self, index: usize) -> &CovariateColumn {
        &self.covariates[index]
    }

    pub fn covariate(&self, name: &str) -> Result<(&CovariateDef, &CovariateColumn)> {
        let idx = self
            .codebook
            .covariate_index(name)
            .ok_or_else(|| Error::UnknownCovariate(name.to_string()))?;
        Ok((&self.codebook.covariates[idx], &self.covariates[idx]))
    }

    /// Keeps only the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let m = self.n_items();
        let mut responses = Vec::with_capacity(rows.len() * m);
        for &r in rows {
            responses.extend_from_slice(self.row(r));
        }
        Self {
            codebook: self.codebook.clone(),
            n_rows: rows.len(),
            responses,
            covariates: self.covariates.iter().map(|c| c.select(rows)).collect(),
        }
    }

    /// Restricts the dataset to `items` (in the order given) and to rows
    /// matching `filter`. The codebook keeps only the requested items.
    pub fn subset<S: AsRef<str>>(&self, items: &[S], filter: &CovariateFilter) -> Result<Self> {
        let indices = items
            .iter()
            .map(|a| {
                self.codebook
                    .item_index(a.as_ref())
                    .ok_or_else(|| Error::UnknownItem(a.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let rows = filter.matching_rows(self)?;
        let codebook = Codebook {
            items: indices.iter().map(|&j| self.codebook.items[j].clone()).collect(),
            covariates: self.codebook.covariates.clone(),
        };
        codebook.validate()?;
        let mut responses = Vec::with_capacity(rows.len() * indices.len());
        for &r in &rows {
            responses.extend(indices.iter().map(|&j| self.response(r, j)));
        }
        Ok(Self {
            codebook,
            n_rows: rows.len(),
            responses,
            covariates: self.covariates.iter().map(|c| c.select(&rows)).collect(),
        })
    }

    /// Complete item responses recoded to 0-based categories.
    pub fn item_matrix(&self) -> Result<OrdinalMatrix> {
        self.ordinal_matrix::<&str>(&[])
    }

    /// Items followed by the named binary/categorical covariates as one
    /// 0-based ordinal matrix; used as the node set of the MRF. Requires
    /// complete data across the selected columns.
    pub fn ordinal_matrix<S: AsRef<str>>(&self, covariates: &[S]) -> Result<OrdinalMatrix> {
        let mut names = self.codebook.item_abbrs();
        let mut n_categories: Vec<usize> = self.codebook.items.iter().map(|i| i.n_categories).collect();
        let mut cov_cols = Vec::new();
        for name in covariates {
            let (def, col) = self.covariate(name.as_ref())?;
            let CovariateColumn::Levels(levels) = col else {
                return Err(Error::InvalidParams(format!(
                    "numeric covariate {} cannot enter an ordinal model",
                    def.name
                )));
            };
            names.push(def.name.clone());
            n_categories.push(def.levels.len());
            cov_cols.push((def.name.as_str(), levels));
        }
        let p = names.len();
        let mut values = Vec::with_capacity(self.n_rows * p);
        for r in 0..self.n_rows {
            for (j, v) in self.row(r).iter().enumerate() {
                let v = v.ok_or_else(|| Error::IncompleteData {
                    row: r + 1,
                    column: self.codebook.items[j].abbr.clone(),
                })?;
                values.push(v - 1);
            }
            for (name, levels) in &cov_cols {
                let v = levels[r].ok_or_else(|| Error::IncompleteData {
                    row: r + 1,
                    column: name.to_string(),
                })?;
                values.push(v as u8);
            }
        }
        OrdinalMatrix::new(names, n_categories, values)
    }

    /// Numeric design matrix for latent regression. Binary covariates map to
    /// {0, 1} in codebook level order, categorical ones expand to dummies
    /// against their first level, numeric ones are centred at their mean.
    pub fn covariate_design<S: AsRef<str>>(&self, covariates: &[S]) -> Result<CovariateMatrix> {
        let mut names = Vec::new();
        let mut columns: Vec<Vec<f64>> = Vec::new();
        for name in covariates {
            let (def, col) = self.covariate(name.as_ref())?;
            let missing = |r: usize| Error::IncompleteData {
                row: r + 1,
                column: def.name.clone(),
            };
            match col {
                CovariateColumn::Levels(levels) => {
                    let idx = levels
                        .iter()
                        .enumerate()
                        .map(|(r, l)| l.ok_or_else(|| missing(r)))
                        .collect::<Result<Vec<_>>>()?;
                    if def.kind == CovariateKind::Binary {
                        names.push(def.name.clone());
                        columns.push(idx.iter().map(|&l| l as f64).collect());
                    } else {
                        for (level, label) in def.levels.iter().enumerate().skip(1) {
                            names.push(format!("{}={label}", def.name));
                            columns.push(idx.iter().map(|&l| (l == level) as u8 as f64).collect());
                        }
                    }
                }
                CovariateColumn::Numeric(values) => {
                    let v = values
                        .iter()
                        .enumerate()
                        .map(|(r, x)| x.ok_or_else(|| missing(r)))
                        .collect::<Result<Vec<_>>>()?;
                    let mean = if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
                    names.push(def.name.clone());
                    columns.push(v.iter().map(|x| x - mean).collect());
                }
            }
        }
        let mut values = Vec::with_capacity(self.n_rows * names.len());
        for r in 0..self.n_rows {
            values.extend(columns.iter().map(|c| c[r]));
        }
        CovariateMatrix::new(names, self.n_rows, values)
    }
}

/// Conjunction of `covariate = level` clauses selecting respondents.
/// Rows with a missing value in a filtered covariate never match.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CovariateFilter {
    clauses: Vec<(String, String)>,
}

impl CovariateFilter {
    pub fn all() -> Self {
        Self::default()
    }

    pub fn equals(mut self, covariate: impl Into<String>, level: impl Into<String>) -> Self {
        self.clauses.push((covariate.into(), level.into()));
        self
    }

    /// Parses `NAME=LEVEL[,NAME=LEVEL...]`; an empty string keeps all rows.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut filter = Self::all();
        for clause in spec.split(',').map(str::trim).filter(|c| !c.is_empty()) {
            let (name, level) = clause
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("filter clause {clause:?} is not NAME=LEVEL")))?;
            filter = filter.equals(name.trim(), level.trim());
        }
        Ok(filter)
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    fn matching_rows(&self, ds: &SurveyDataset) -> Result<Vec<usize>> {
        let mut tests: Vec<Box<dyn Fn(usize) -> bool + '_>> = Vec::new();
        for (name, level) in &self.clauses {
            let (def, col) = ds.covariate(name)?;
            match col {
                CovariateColumn::Levels(v) => {
                    let want = def.levels.iter().position(|l| l == level).ok_or_else(|| {
                        Error::Domain(format!("covariate {name} has no level {level:?}"))
                    })?;
                    tests.push(Box::new(move |r| v[r] == Some(want)));
                }
                CovariateColumn::Numeric(v) => {
                    let want: f64 = level
                        .parse()
                        .map_err(|_| Error::Domain(format!("{level:?} is not a number for covariate {name}")))?;
                    tests.push(Box::new(move |r| v[r] == Some(want)));
                }
            }
        }
        Ok((0..ds.n_rows).filter(|&r| tests.iter().all(|t| t(r))).collect())
    }
}
