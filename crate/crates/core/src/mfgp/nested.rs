use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{validate_levels, FidelityLevel};
use crate::error::{Error, Result};
use crate::gp::{self, FitConfig};
use crate::numerics::DenseMatrix;
use crate::seed::{derive_seed, rng};

/// Two inputs are the same point if every coordinate differs by at most this.
pub const NESTING_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputationMode {
    /// Impute the lower-level GP posterior mean.
    PosteriorMean,
    /// Draw from the lower-level GP's marginal posterior.
    Sample { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestingConfig {
    pub fit: FitConfig,
    pub mode: ImputationMode,
}

impl Default for NestingConfig {
    fn default() -> Self {
        NestingConfig {
            fit: FitConfig::default(),
            mode: ImputationMode::PosteriorMean,
        }
    }
}

/// One synthetic row appended to a lower level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImputedRow {
    /// Level that received the row (1-based).
    pub level: usize,
    /// Row index within the augmented level.
    pub row: usize,
    /// Row of level `level + 1` whose input was missing.
    pub source_row: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Nested {
    pub levels: Vec<FidelityLevel>,
    pub log: Vec<ImputedRow>,
}

pub(crate) fn find_row(x: &DenseMatrix, row: &[f64]) -> Option<usize> {
    x.row_iter().position(|r| {
        r.iter()
            .zip(row)
            .all(|(a, b)| (a - b).abs() <= NESTING_TOLERANCE)
    })
}

/// Errors with [`Error::NotNested`] unless every level-`t` input appears at
/// level `t-1`.
pub fn check_nested(levels: &[FidelityLevel]) -> Result<()> {
    validate_levels(levels)?;
    for t in 1..levels.len() {
        for (i, row) in levels[t].x.row_iter().enumerate() {
            if find_row(&levels[t - 1].x, row).is_none() {
                return Err(Error::NotNested {
                    level: t + 1,
                    row: i,
                    lower: t,
                });
            }
        }
    }
    Ok(())
}

/// Appends every level-`t+1` input missing from level `t` to level `t`, with a
/// target imputed from a GP fitted to level `t`'s original data. Pairs are
/// processed top-down so imputed rows propagate to every lower level.
pub fn ensure_nested(levels: &[FidelityLevel], config: &NestingConfig) -> Result<Nested> {
    validate_levels(levels)?;
    let mut out = levels.to_vec();
    let mut log = Vec::new();
    for t in (0..levels.len().saturating_sub(1)).rev() {
        let mut lower_x = out[t].x.clone();
        let mut missing: Vec<(usize, Vec<f64>)> = Vec::new();
        for (i, row) in out[t + 1].x.row_iter().enumerate() {
            if find_row(&lower_x, row).is_none() {
                lower_x = lower_x.vstack(&DenseMatrix::from_rows(&[row])?)?;
                missing.push((i, row.to_vec()));
            }
        }
        if missing.is_empty() {
            continue;
        }
        let donor = &out[t];
        let model = gp::fit(&donor.x, &donor.y, &config.fit)?;
        let query = DenseMatrix::from_rows(&missing.iter().map(|(_, r)| r.clone()).collect::<Vec<_>>())?;
        let post = gp::predict(&model, &query)?;
        let values: Vec<f64> = match config.mode {
            ImputationMode::PosteriorMean => post.mean.clone(),
            ImputationMode::Sample { seed } => {
                let mut r = rng(derive_seed(seed, t as u64 + 1));
                post.mean
                    .iter()
                    .zip(&post.variance)
                    .map(|(m, v)| {
                        let z: f64 = StandardNormal.sample(&mut r);
                        m + v.sqrt() * z
                    })
                    .collect()
            }
        };
        let base = donor.len();
        let mut y = donor.y.clone();
        for (k, ((source_row, _), value)) in missing.iter().zip(&values).enumerate() {
            y.push(*value);
            log.push(ImputedRow {
                level: t + 1,
                row: base + k,
                source_row: *source_row,
                value: *value,
            });
        }
        log::debug!("level {}: imputed {} rows to satisfy nesting", t + 1, missing.len());
        out[t] = FidelityLevel::new(donor.index, lower_x, y)?;
    }
    // report in level order
    log.sort_by_key(|r| (r.level, r.row));
    Ok(Nested { levels: out, log })
}
