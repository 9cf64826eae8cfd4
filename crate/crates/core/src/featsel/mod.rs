//! Feature ranking by minimum-redundancy maximum-relevance (MRMR) over
//! discretized columns, and the subset-size sweep that picks how many ranked
//! features to keep.
//!
//! Discretized values are used only for ranking; models are always trained on
//! the continuous columns.

mod discretize;
mod sweep;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseMatrix;

pub use discretize::{discretize, DiscretizationMethod};
pub use sweep::{best_subset_size, sweep_subset_size, write_sweep_csv, SweepPoint};

/// Integer-labelled columns sharing a row count.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteTable {
    n_rows: usize,
    columns: Vec<Vec<usize>>,
    n_bins: Vec<usize>,
}

impl DiscreteTable {
    pub fn new(columns: Vec<Vec<usize>>) -> Result<Self> {
        let n_rows = columns.first().map_or(0, Vec::len);
        for c in &columns {
            if c.len() != n_rows {
                return Err(Error::DimensionMismatch {
                    context: "discrete table column",
                    expected: n_rows,
                    got: c.len(),
                });
            }
        }
        if n_rows == 0 && !columns.is_empty() {
            return Err(Error::EmptyInput("discrete table"));
        }
        let n_bins = columns.iter().map(|c| c.iter().max().map_or(1, |m| m + 1)).collect();
        Ok(DiscreteTable { n_rows, columns, n_bins })
    }

    /// Discretizes every column of `x`. `target` is required by the MDL method.
    pub fn from_matrix(x: &DenseMatrix, n_bins: usize, method: DiscretizationMethod, target: Option<&[usize]>) -> Result<Self> {
        let columns = (0..x.cols())
            .map(|j| discretize(&x.column_values(j), n_bins, method, target))
            .collect::<Result<Vec<_>>>()?;
        DiscreteTable::new(columns)
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[usize] {
        &self.columns[j]
    }

    pub fn n_bins(&self, j: usize) -> usize {
        self.n_bins[j]
    }
}

/// Greedy MRMR order, best first. `scores[i]` is the criterion value of
/// `order[i]` when it was picked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRanking {
    pub order: Vec<usize>,
    pub scores: Vec<f64>,
}

impl FeatureRanking {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// The first `n` features, sorted by original column index.
    pub fn top(&self, n: usize) -> Vec<usize> {
        let mut idx = self.order[..n.min(self.order.len())].to_vec();
        idx.sort_unstable();
        idx
    }

    /// Writes `rank,feature_name,score` rows, rank starting at 1.
    pub fn write_csv<W: std::io::Write>(&self, out: W, feature_names: &[String]) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["rank", "feature_name", "score"])?;
        for (i, (&f, s)) in self.order.iter().zip(&self.scores).enumerate() {
            let name = feature_names.get(f).cloned().unwrap_or_else(|| format!("x{f}"));
            w.write_record([(i + 1).to_string(), name, s.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn counts<K: std::hash::Hash + Eq>(keys: impl Iterator<Item = K>) -> HashMap<K, usize> {
    let mut m = HashMap::new();
    for k in keys {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

/// Sums in sorted order so the result depends only on the multiset of terms.
fn stable_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

/// Plug-in entropy in nats.
pub fn entropy(labels: &[usize]) -> f64 {
    let n = labels.len() as f64;
    let terms = counts(labels.iter())
        .into_values()
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .collect();
    stable_sum(terms)
}

/// Plug-in mutual information `Σ p(a,b) ln[p(a,b) / (p(a) p(b))]` in nats.
pub fn mutual_information(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "mutual information",
            expected: a.len(),
            got: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyInput("mutual information"));
    }
    let n = a.len();
    let ca = counts(a.iter());
    let cb = counts(b.iter());
    let terms = counts(a.iter().zip(b))
        .into_iter()
        .map(|((x, y), c)| {
            let ratio = (c * n) as f64 / (ca[x] * cb[y]) as f64;
            c as f64 / n as f64 * ratio.ln()
        })
        .collect();
    let mi = stable_sum(terms);
    if mi < -1e-15 {
        log::warn!("mutual information {mi:e} below roundoff tolerance");
    }
    Ok(mi.max(0.0))
}

/// Greedy MRMR with the difference criterion: the first pick maximizes
/// `I(f; target)`, each later pick maximizes
/// `I(f; target) − mean_{s∈S} I(f; s)`. Ties go to the lower column index.
pub fn mrmr_rank(table: &DiscreteTable, target: &[usize]) -> Result<FeatureRanking> {
    let m = table.n_columns();
    if m == 0 {
        return Err(Error::EmptyInput("feature table"));
    }
    if target.len() != table.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "mrmr target",
            expected: table.n_rows(),
            got: target.len(),
        });
    }
    let relevance = (0..m)
        .map(|j| mutual_information(table.column(j), target))
        .collect::<Result<Vec<_>>>()?;
    let mut redundancy = vec![0.0; m];
    let mut chosen = vec![false; m];
    let mut order = Vec::with_capacity(m);
    let mut scores = Vec::with_capacity(m);
    for step in 0..m {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..m).filter(|j| !chosen[*j]) {
            let score = if step == 0 { relevance[j] } else { relevance[j] - redundancy[j] / step as f64 };
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((j, score));
            }
        }
        let (pick, score) = best.expect("an unselected feature remains");
        chosen[pick] = true;
        order.push(pick);
        scores.push(score);
        for j in (0..m).filter(|j| !chosen[*j]) {
            redundancy[j] += mutual_information(table.column(j), table.column(pick))?;
        }
    }
    Ok(FeatureRanking { order, scores })
}

/// Discretizes the target with equal-frequency bins, the features with
/// `method` (using the target labels as classes for MDL), then ranks.
pub fn rank_features(x: &DenseMatrix, y: &[f64], n_bins: usize, method: DiscretizationMethod) -> Result<FeatureRanking> {
    if y.len() != x.rows() {
        return Err(Error::DimensionMismatch {
            context: "feature ranking target",
            expected: x.rows(),
            got: y.len(),
        });
    }
    let target = discretize(y, n_bins, DiscretizationMethod::EqualFrequency, None)?;
    let table = DiscreteTable::from_matrix(x, n_bins, method, Some(&target))?;
    mrmr_rank(&table, &target)
}
