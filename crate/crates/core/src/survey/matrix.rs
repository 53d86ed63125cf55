use crate::error::{Error, Result};

/// Complete `n × p` matrix of 0-based ordinal scores; column `j` takes
/// values in `0..n_categories[j]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OrdinalMatrix {
    names: Vec<String>,
    n_categories: Vec<usize>,
    n_rows: usize,
    values: Vec<u8>,
}

impl OrdinalMatrix {
    pub fn new(names: Vec<String>, n_categories: Vec<usize>, values: Vec<u8>) -> Result<Self> {
        let p = names.len();
        if n_categories.len() != p {
            return Err(Error::InvalidParams(format!(
                "{} names but {} category counts",
                p,
                n_categories.len()
            )));
        }
        if let Some(j) = n_categories.iter().position(|&c| !(1..=256).contains(&c)) {
            return Err(Error::InvalidParams(format!(
                "column {} has {} categories",
                names[j], n_categories[j]
            )));
        }
        if p == 0 {
            if !values.is_empty() {
                return Err(Error::InvalidParams("values without columns".into()));
            }
        } else if !values.len().is_multiple_of(p) {
            return Err(Error::InvalidParams(format!(
                "{} values do not fill rows of {p} columns",
                values.len()
            )));
        }
        let n_rows = if p == 0 { 0 } else { values.len() / p };
        for (k, &v) in values.iter().enumerate() {
            let j = k % p;
            if v as usize >= n_categories[j] {
                return Err(Error::ValueOutOfRange {
                    row: k / p + 1,
                    column: names[j].clone(),
                    value: v.to_string(),
                });
            }
        }
        Ok(Self {
            names,
            n_categories,
            n_rows,
            values,
        })
    }

    /// Names default to `V1..Vp`.
    pub fn from_rows(n_categories: Vec<usize>, rows: &[Vec<u8>]) -> Result<Self> {
        let names = (1..=n_categories.len()).map(|j| format!("V{j}")).collect();
        let values = rows.iter().flat_map(|r| r.iter().copied()).collect();
        if let Some(r) = rows.iter().position(|r| r.len() != n_categories.len()) {
            return Err(Error::InvalidParams(format!("row {} has the wrong width", r + 1)));
        }
        Self::new(names, n_categories, values)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_categories(&self) -> &[usize] {
        &self.n_categories
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, row: usize, col: usize) -> u8 {
        self.values[row * self.n_cols() + col]
    }

    pub fn row(&self, row: usize) -> &[u8] {
        let p = self.n_cols();
        &self.values[row * p..(row + 1) * p]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u8]> {
        (0..self.n_rows).map(|r| self.row(r))
    }

    pub fn column(&self, col: usize) -> impl Iterator<Item = u8> + '_ {
        (0..self.n_rows).map(move |r| self.get(r, col))
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    /// Reorders (or drops) columns.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let mut values = Vec::with_capacity(self.n_rows * cols.len());
        for r in self.rows() {
            values.extend(cols.iter().map(|&c| r[c]));
        }
        Self {
            names: cols.iter().map(|&c| self.names[c].clone()).collect(),
            n_categories: cols.iter().map(|&c| self.n_categories[c]).collect(),
            n_rows: self.n_rows,
            values,
        }
    }
}

/// Row-major `n × K` numeric design matrix of latent-regression covariates.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariateMatrix {
    names: Vec<String>,
    n_rows: usize,
    values: Vec<f64>,
}

impl CovariateMatrix {
    pub fn new(names: Vec<String>, n_rows: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n_rows * names.len() {
            return Err(Error::InvalidParams(format!(
                "{} values for a {n_rows} × {} design",
                values.len(),
                names.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("non-finite covariate value".into()));
        }
        Ok(Self { names, n_rows, values })
    }

    /// A design with no covariates.
    pub fn empty(n_rows: usize) -> Self {
        Self {
            names: Vec::new(),
            n_rows,
            values: Vec::new(),
        }
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let k = self.n_cols();
        &self.values[row * k..(row + 1) * k]
    }
}
