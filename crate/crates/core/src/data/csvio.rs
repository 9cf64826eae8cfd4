use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, Provenance};
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Column mapping for [`load_csv`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub target: String,
    pub fidelity: String,
    /// Feature columns in order; `None` takes every other column.
    pub features: Option<Vec<String>>,
    /// Fidelity labels from lowest to highest. Without it the column must hold
    /// integers, and distinct values map to levels in ascending order.
    pub fidelity_order: Option<Vec<String>>,
}

impl CsvSchema {
    pub fn new(target: impl Into<String>, fidelity: impl Into<String>) -> Self {
        CsvSchema {
            target: target.into(),
            fidelity: fidelity.into(),
            features: None,
            fidelity_order: None,
        }
    }
}

pub fn load_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path)?;
    read_csv(file, schema, Some(path.display().to_string()))
}

fn position(headers: &[String], name: &str) -> Result<usize> {
    headers
        .iter()
        .position(|h| h == name)
        .ok_or_else(|| Error::MissingColumn(name.to_string()))
}

/// Parses CSV with a header row; lines starting with `#` are skipped. Data
/// rows are numbered from 1 in errors.
pub fn read_csv<R: Read>(input: R, schema: &CsvSchema, source: Option<String>) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(String::is_empty) {
        return Err(Error::EmptyFile);
    }
    let ti = position(&headers, &schema.target)?;
    let fi = position(&headers, &schema.fidelity)?;
    let feature_names: Vec<String> = match &schema.features {
        Some(f) => f.clone(),
        None => headers.iter().enumerate().filter(|(j, _)| *j != ti && *j != fi).map(|(_, h)| h.clone()).collect(),
    };
    let mut seen = HashSet::new();
    for name in &feature_names {
        if !seen.insert(name) {
            return Err(Error::DuplicateFeature(name.clone()));
        }
    }
    let cols = feature_names.iter().map(|n| position(&headers, n)).collect::<Result<Vec<_>>>()?;

    let number = |row: usize, col: usize, cell: &str| -> Result<f64> {
        match cell.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::NonNumericCell {
                row,
                column: headers[col].clone(),
                value: cell.to_string(),
            }),
        }
    };
    let mut entries = Vec::new();
    let mut y = Vec::new();
    let mut raw_fidelity = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        let row = i + 1;
        for &c in &cols {
            entries.push(number(row, c, record.get(c).unwrap_or(""))?);
        }
        y.push(number(row, ti, record.get(ti).unwrap_or(""))?);
        raw_fidelity.push(record.get(fi).unwrap_or("").to_string());
    }
    if y.is_empty() {
        return Err(Error::EmptyFile);
    }

    let (fidelity, level_labels) = match &schema.fidelity_order {
        Some(order) => {
            let tags = raw_fidelity
                .iter()
                .enumerate()
                .map(|(i, label)| {
                    order
                        .iter()
                        .position(|o| o == label)
                        .map(|p| p + 1)
                        .ok_or_else(|| Error::UnknownFidelityLabel { row: i + 1, label: label.clone() })
                })
                .collect::<Result<Vec<_>>>()?;
            (tags, order.clone())
        }
        None => {
            let values = raw_fidelity
                .iter()
                .enumerate()
                .map(|(i, cell)| {
                    cell.parse::<i64>().map_err(|_| Error::NonNumericCell {
                        row: i + 1,
                        column: schema.fidelity.clone(),
                        value: cell.clone(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let mut distinct = values.clone();
            distinct.sort_unstable();
            distinct.dedup();
            let tags = values.iter().map(|v| distinct.binary_search(v).expect("present") + 1).collect();
            (tags, distinct.iter().map(i64::to_string).collect())
        }
    };

    let n = y.len();
    let ds = Dataset {
        x: DenseMatrix::from_row_major(n, cols.len(), entries)?,
        feature_names,
        target_name: schema.target.clone(),
        fidelity_name: schema.fidelity.clone(),
        y,
        fidelity,
        level_labels,
        provenance: Provenance { source, row_ids: (0..n).collect() },
    };
    ds.validate()?;
    Ok(ds)
}

/// Writes features, target and fidelity label columns. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn write_csv<W: std::io::Write>(ds: &Dataset, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = ds.feature_names.iter().map(String::as_str).collect();
    header.push(&ds.target_name);
    header.push(&ds.fidelity_name);
    w.write_record(&header)?;
    for i in 0..ds.n_rows() {
        let mut rec: Vec<String> = ds.x.row(i).iter().map(f64::to_string).collect();
        rec.push(ds.y[i].to_string());
        rec.push(ds.level_labels[ds.fidelity[i] - 1].clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
