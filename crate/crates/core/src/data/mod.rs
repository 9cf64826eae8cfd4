//! Tabular datasets with a per-row fidelity tag: CSV ingestion, min-max
//! normalization, train/test split plans and PCA projections.

mod csvio;
mod normalize;
mod pca;
mod split;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mfgp::FidelityLevel;
use crate::numerics::DenseMatrix;

pub use csvio::{load_csv, read_csv, write_csv, CsvSchema};
pub use normalize::{apply_normalize, fit_normalize, NormalizationReference, NormalizationStats};
pub use pca::{pca_project, Pca};
pub use split::{loo_splits, make_splits, SplitPlan};

/// Where the rows came from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub source: Option<String>,
    /// Original row number (0-based, header excluded) of each row.
    pub row_ids: Vec<usize>,
}

/// Feature matrix, target and fidelity level (1-based) of every row.
///
/// Equality ignores provenance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub fidelity_name: String,
    pub x: DenseMatrix,
    pub y: Vec<f64>,
    pub fidelity: Vec<usize>,
    /// `level_labels[t - 1]` is the source label of level `t`.
    pub level_labels: Vec<String>,
    pub provenance: Provenance,
}

impl PartialEq for Dataset {
    fn eq(&self, other: &Self) -> bool {
        self.feature_names == other.feature_names
            && self.target_name == other.target_name
            && self.fidelity_name == other.fidelity_name
            && self.x == other.x
            && self.y == other.y
            && self.fidelity == other.fidelity
            && self.level_labels == other.level_labels
    }
}

impl Dataset {
    /// Builds and validates a dataset; provenance row ids default to `0..n`.
    pub fn new(
        feature_names: Vec<String>,
        x: DenseMatrix,
        y: Vec<f64>,
        fidelity: Vec<usize>,
        level_labels: Vec<String>,
    ) -> Result<Self> {
        let n = x.rows();
        let ds = Dataset {
            feature_names,
            target_name: "y".into(),
            fidelity_name: "fidelity".into(),
            provenance: Provenance { source: None, row_ids: (0..n).collect() },
            x,
            y,
            fidelity,
            level_labels,
        };
        ds.validate()?;
        Ok(ds)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let n = self.x.rows();
        for (context, got) in [("dataset targets", self.y.len()), ("dataset fidelity tags", self.fidelity.len())] {
            if got != n {
                return Err(Error::DimensionMismatch { context, expected: n, got });
            }
        }
        if self.feature_names.len() != self.x.cols() {
            return Err(Error::DimensionMismatch {
                context: "feature names",
                expected: self.x.cols(),
                got: self.feature_names.len(),
            });
        }
        let mut seen = HashSet::new();
        for name in &self.feature_names {
            if !seen.insert(name) {
                return Err(Error::DuplicateFeature(name.clone()));
            }
        }
        if self.y.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset targets"));
        }
        let levels = self.level_labels.len();
        if let Some(bad) = self.fidelity.iter().find(|t| **t == 0 || **t > levels) {
            return Err(Error::Config(format!("fidelity level {bad} outside 1..={levels}")));
        }
        Ok(())
    }

    pub fn n_rows(&self) -> usize {
        self.x.rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.cols()
    }

    pub fn n_levels(&self) -> usize {
        self.level_labels.len()
    }

    /// Row indices at level `t`, in file order.
    pub fn rows_at(&self, t: usize) -> Vec<usize> {
        (0..self.n_rows()).filter(|i| self.fidelity[*i] == t).collect()
    }

    /// Row indices at the highest level.
    pub fn high_rows(&self) -> Vec<usize> {
        self.rows_at(self.n_levels())
    }

    pub fn select_rows(&self, idx: &[usize]) -> Dataset {
        Dataset {
            x: self.x.select_rows(idx),
            y: idx.iter().map(|i| self.y[*i]).collect(),
            fidelity: idx.iter().map(|i| self.fidelity[*i]).collect(),
            provenance: Provenance {
                source: self.provenance.source.clone(),
                row_ids: idx.iter().map(|i| self.provenance.row_ids.get(*i).copied().unwrap_or(*i)).collect(),
            },
            ..self.clone()
        }
    }

    pub fn select_features(&self, idx: &[usize]) -> Dataset {
        Dataset {
            feature_names: idx.iter().map(|j| self.feature_names[*j].clone()).collect(),
            x: self.x.select_cols(idx),
            ..self.clone()
        }
    }

    /// One [`FidelityLevel`] per level, restricted to `rows`.
    pub fn levels_from(&self, rows: &[usize]) -> Result<Vec<FidelityLevel>> {
        (1..=self.n_levels())
            .map(|t| {
                let idx: Vec<usize> = rows.iter().copied().filter(|i| self.fidelity[*i] == t).collect();
                FidelityLevel::new(t, self.x.select_rows(&idx), idx.iter().map(|i| self.y[*i]).collect())
            })
            .collect()
    }

    pub fn levels(&self) -> Result<Vec<FidelityLevel>> {
        self.levels_from(&(0..self.n_rows()).collect::<Vec<_>>())
    }

    /// Builds a dataset from per-level training data.
    pub fn from_levels(levels: &[FidelityLevel], feature_names: Vec<String>) -> Result<Dataset> {
        crate::mfgp::validate_levels(levels)?;
        let mut x = levels[0].x.clone();
        for l in &levels[1..] {
            x = x.vstack(&l.x)?;
        }
        let y = levels.iter().flat_map(|l| l.y.iter().copied()).collect();
        let fidelity = levels.iter().flat_map(|l| std::iter::repeat_n(l.index, l.len())).collect();
        let labels = levels.iter().map(|l| l.index.to_string()).collect();
        Dataset::new(feature_names, x, y, fidelity, labels)
    }

    /// SHA-256 over the names, values and fidelity tags.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        for name in self.feature_names.iter().chain([&self.target_name, &self.fidelity_name]) {
            h.update(name.as_bytes());
            h.update([0]);
        }
        for label in &self.level_labels {
            h.update(label.as_bytes());
            h.update([0]);
        }
        for v in self.x.entries().iter().chain(&self.y) {
            h.update(v.to_bits().to_le_bytes());
        }
        for t in &self.fidelity {
            h.update((*t as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Default feature names `x0, x1, ...`.
pub fn default_feature_names(d: usize) -> Vec<String> {
    (0..d).map(|j| format!("x{j}")).collect()
}

#[cfg(test)]
mod tests;
