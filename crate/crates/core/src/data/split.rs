use rand::seq::index::sample;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::seed::{derive_seed, rng};

/// Row indices of one train/test split. Every lower-fidelity row is always in
/// the training set; high-fidelity rows are partitioned.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub seed: u64,
    pub n_t: usize,
    pub train_high: Vec<usize>,
    pub test_high: Vec<usize>,
    pub low: Vec<usize>,
}

impl SplitPlan {
    /// Low rows followed by the high training rows.
    pub fn train_rows(&self) -> Vec<usize> {
        let mut rows = self.low.clone();
        rows.extend(&self.train_high);
        rows
    }
}

fn partition(ds: &Dataset) -> (Vec<usize>, Vec<usize>) {
    let top = ds.n_levels();
    (0..ds.n_rows()).partition(|i| ds.fidelity[*i] == top)
}

/// `n_repeats` uniform draws of `n_t` high-fidelity training rows; repeat `i`
/// uses the derived seed `(seed, i)`.
pub fn make_splits(ds: &Dataset, n_t: usize, n_repeats: usize, seed: u64) -> Result<Vec<SplitPlan>> {
    let (high, low) = partition(ds);
    if n_t == 0 || n_t >= high.len() {
        return Err(Error::TrainSizeOutOfRange { n_t, n_high: high.len() });
    }
    Ok((0..n_repeats)
        .map(|i| {
            let s = derive_seed(seed, i as u64);
            let mut pick = sample(&mut rng(s), high.len(), n_t).into_vec();
            pick.sort_unstable();
            let mut in_train = vec![false; high.len()];
            for p in &pick {
                in_train[*p] = true;
            }
            SplitPlan {
                seed: s,
                n_t,
                train_high: pick.iter().map(|p| high[*p]).collect(),
                test_high: (0..high.len()).filter(|p| !in_train[*p]).map(|p| high[p]).collect(),
                low: low.clone(),
            }
        })
        .collect())
}

/// One plan per high-fidelity row, holding that row out.
pub fn loo_splits(ds: &Dataset) -> Result<Vec<SplitPlan>> {
    let (high, low) = partition(ds);
    if high.len() < 2 {
        return Err(Error::TooFewRows { needed: 2, found: high.len() });
    }
    Ok(high
        .iter()
        .enumerate()
        .map(|(p, &row)| SplitPlan {
            seed: p as u64,
            n_t: high.len() - 1,
            train_high: high.iter().copied().filter(|r| *r != row).collect(),
            test_high: vec![row],
            low: low.clone(),
        })
        .collect())
}
