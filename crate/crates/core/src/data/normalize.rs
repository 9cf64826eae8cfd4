use serde::{Deserialize, Serialize};

use super::{Dataset, SplitPlan};
use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

/// Rows the min/max are taken from.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationReference {
    #[default]
    AllRows,
    /// Low-fidelity rows plus the high-fidelity training rows of the plan.
    TrainOnly(SplitPlan),
}

/// Per-column min/max for the features and the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationStats {
    pub feature_min: Vec<f64>,
    pub feature_max: Vec<f64>,
    pub target_min: f64,
    pub target_max: f64,
}

fn scale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        (v - lo) / (hi - lo)
    } else {
        0.0
    }
}

fn unscale(v: f64, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        lo + v * (hi - lo)
    } else {
        lo
    }
}

fn min_max(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

impl NormalizationStats {
    /// Fits stats on the given rows of `x` and `y`.
    pub fn fit(x: &DenseMatrix, y: &[f64], rows: &[usize]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyReference);
        }
        let (feature_min, feature_max) = (0..x.cols()).map(|j| min_max(rows.iter().map(|i| x.get(*i, j)))).unzip();
        let (target_min, target_max) = min_max(rows.iter().map(|i| y[*i]));
        let stats = NormalizationStats { feature_min, feature_max, target_min, target_max };
        for j in stats.zero_range_features() {
            log::warn!("feature column {j} has zero range; it normalizes to 0");
        }
        if stats.target_max <= stats.target_min {
            log::warn!("target has zero range; it normalizes to 0");
        }
        Ok(stats)
    }

    /// Features whose reference range is zero.
    pub fn zero_range_features(&self) -> Vec<usize> {
        (0..self.feature_min.len()).filter(|j| self.feature_max[*j] <= self.feature_min[*j]).collect()
    }

    fn check_cols(&self, x: &DenseMatrix) -> Result<()> {
        if x.cols() != self.feature_min.len() {
            return Err(Error::DimensionMismatch {
                context: "normalization features",
                expected: self.feature_min.len(),
                got: x.cols(),
            });
        }
        Ok(())
    }

    pub fn transform_features(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_cols(x)?;
        let d = x.cols();
        let entries = x
            .entries()
            .iter()
            .enumerate()
            .map(|(k, v)| scale(*v, self.feature_min[k % d], self.feature_max[k % d]))
            .collect();
        DenseMatrix::from_row_major(x.rows(), d, entries)
    }

    pub fn inverse_features(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_cols(x)?;
        let d = x.cols();
        let entries = x
            .entries()
            .iter()
            .enumerate()
            .map(|(k, v)| unscale(*v, self.feature_min[k % d], self.feature_max[k % d]))
            .collect();
        DenseMatrix::from_row_major(x.rows(), d, entries)
    }

    pub fn transform_target(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| scale(*v, self.target_min, self.target_max)).collect()
    }

    pub fn inverse_target(&self, y: &[f64]) -> Vec<f64> {
        y.iter().map(|v| unscale(*v, self.target_min, self.target_max)).collect()
    }

    /// Maps a predictive variance on the normalized scale back to target units.
    pub fn inverse_target_variance(&self, v: &[f64]) -> Vec<f64> {
        let r = (self.target_max - self.target_min).max(0.0);
        v.iter().map(|x| x * r * r).collect()
    }

    /// Undoes [`apply_normalize`].
    pub fn inverse(&self, ds: &Dataset) -> Result<Dataset> {
        Ok(Dataset {
            x: self.inverse_features(&ds.x)?,
            y: self.inverse_target(&ds.y),
            ..ds.clone()
        })
    }
}

pub fn fit_normalize(ds: &Dataset, reference: &NormalizationReference) -> Result<NormalizationStats> {
    let rows: Vec<usize> = match reference {
        NormalizationReference::AllRows => (0..ds.n_rows()).collect(),
        NormalizationReference::TrainOnly(plan) => plan.train_rows(),
    };
    if let Some(bad) = rows.iter().find(|i| **i >= ds.n_rows()) {
        return Err(Error::Config(format!("reference row {bad} out of range")));
    }
    NormalizationStats::fit(&ds.x, &ds.y, &rows)
}

/// `x' = (x − min)/(max − min)` per column; zero-range columns become 0.
pub fn apply_normalize(ds: &Dataset, stats: &NormalizationStats) -> Result<Dataset> {
    Ok(Dataset {
        x: stats.transform_features(&ds.x)?,
        y: stats.transform_target(&ds.y),
        ..ds.clone()
    })
}
