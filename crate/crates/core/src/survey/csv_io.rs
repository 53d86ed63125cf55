use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use super::{Codebook, CovariateColumn, CovariateKind, SurveyDataset};
use crate::error::{Error, Result};
use crate::output::fmt_f64;

fn is_missing_token(s: &str) -> bool {
    s.is_empty() || s.eq_ignore_ascii_case("na")
}

/// Reads a survey CSV whose header names exactly the codebook's columns, in
/// any order.
///
/// Response cells that are empty or not integers become missing; integers
/// outside `1..=H` are rejected. Covariate cells must be empty, `NA` or one
/// of the declared level labels; numeric covariates that fail to parse are
/// missing.
pub fn load_csv(path: impl AsRef<Path>, codebook: &Codebook) -> Result<SurveyDataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, codebook)
}

pub fn read_csv<R: Read>(reader: R, codebook: &Codebook) -> Result<SurveyDataset> {
    codebook.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();

    let expected = codebook.columns();
    let mut position: HashMap<&str, usize> = HashMap::new();
    let mut extra = Vec::new();
    for (k, name) in header.iter().enumerate() {
        if expected.contains(&name.as_str()) && !position.contains_key(name.as_str()) {
            position.insert(name.as_str(), k);
        } else {
            extra.push(name.clone());
        }
    }
    let missing: Vec<String> = expected
        .iter()
        .filter(|c| !position.contains_key(*c))
        .map(|c| c.to_string())
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(Error::HeaderMismatch { missing, extra });
    }

    let item_pos: Vec<usize> = codebook.items.iter().map(|i| position[i.abbr.as_str()]).collect();
    let cov_pos: Vec<usize> = codebook.covariates.iter().map(|c| position[c.name.as_str()]).collect();
    let mut rows = Vec::new();
    let mut covs: Vec<CovariateColumn> = codebook
        .covariates
        .iter()
        .map(|c| match c.kind {
            CovariateKind::Numeric => CovariateColumn::Numeric(Vec::new()),
            _ => CovariateColumn::Levels(Vec::new()),
        })
        .collect();

    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let row_no = r + 1;
        let mut row = Vec::with_capacity(item_pos.len());
        for (item, &k) in codebook.items.iter().zip(&item_pos) {
            let cell = record.get(k).unwrap_or("");
            let value = match cell.parse::<i64>() {
                Ok(v) if v >= 1 && v as usize <= item.n_categories => Some(v as u8),
                Ok(_) => {
                    return Err(Error::ValueOutOfRange {
                        row: row_no,
                        column: item.abbr.clone(),
                        value: cell.to_string(),
                    })
                }
                Err(_) => None,
            };
            row.push(value);
        }
        rows.push(row);
        for ((def, &k), col) in codebook.covariates.iter().zip(&cov_pos).zip(covs.iter_mut()) {
            let cell = record.get(k).unwrap_or("");
            match col {
                CovariateColumn::Numeric(v) => v.push(cell.parse::<f64>().ok().filter(|x| x.is_finite())),
                CovariateColumn::Levels(v) => {
                    if is_missing_token(cell) {
                        v.push(None);
                    } else {
                        let level = def.levels.iter().position(|l| l == cell).ok_or_else(|| {
                            Error::ValueOutOfRange {
                                row: row_no,
                                column: def.name.clone(),
                                value: cell.to_string(),
                            }
                        })?;
                        v.push(Some(level));
                    }
                }
            }
        }
    }
    SurveyDataset::new(codebook.clone(), rows, covs)
}

/// Writes a dataset in the layout [`load_csv`] reads: items then covariates
/// in codebook order, missing cells empty.
pub fn write_csv<W: Write>(ds: &SurveyDataset, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(ds.codebook().columns())?;
    for r in 0..ds.n_rows() {
        let mut record: Vec<String> = ds
            .row(r)
            .iter()
            .map(|v| v.map(|x| x.to_string()).unwrap_or_default())
            .collect();
        for (k, def) in ds.codebook().covariates.iter().enumerate() {
            record.push(match ds.covariate_column(k) {
                CovariateColumn::Levels(v) => v[r].map(|l| def.levels[l].clone()).unwrap_or_default(),
                CovariateColumn::Numeric(v) => v[r].map(fmt_f64).unwrap_or_default(),
            });
        }
        w.write_record(&record)?;
    }
    w.flush().map_err(|e| Error::Csv(e.to_string()))?;
    Ok(())
}
