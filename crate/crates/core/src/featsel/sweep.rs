use serde::{Deserialize, Serialize};

use super::FeatureRanking;
use crate::bench::{run_experiment, ExperimentConfig, ExperimentData, Method};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub n_f: usize,
    pub mean_rmse: Option<f64>,
    pub std_rmse: Option<f64>,
    pub n_failures: usize,
}

/// For `N_f = 1..=len(ranking)`, restricts the data to the top `N_f` ranked
/// features and runs the repeated-split evaluation of `method` at the single
/// `N_t` in `config`, with seed `config.seed + N_f`. Imputation for nested
/// data is redone for every subset.
pub fn sweep_subset_size(
    data: &ExperimentData,
    ranking: &FeatureRanking,
    method: Method,
    config: &ExperimentConfig,
    jobs: usize,
) -> Result<Vec<SweepPoint>> {
    if ranking.len() != data.dataset.n_features() {
        return Err(Error::DimensionMismatch {
            context: "ranking length",
            expected: data.dataset.n_features(),
            got: ranking.len(),
        });
    }
    let [n_t] = config.n_t[..] else {
        return Err(Error::Config("the subset-size sweep takes exactly one N_t".into()));
    };
    (1..=ranking.len())
        .map(|n_f| {
            let restricted = data.restrict_features(&ranking.top(n_f))?;
            let cfg = ExperimentConfig {
                methods: vec![method],
                n_t: vec![n_t],
                seed: config.seed.wrapping_add(n_f as u64),
                feature_selection: None,
                ..config.clone()
            };
            let report = run_experiment(&restricted, &cfg, jobs)?;
            let cell = &report.cells[0];
            Ok(SweepPoint {
                n_f,
                mean_rmse: cell.mean_rmse,
                std_rmse: cell.std_rmse,
                n_failures: cell.n_failures,
            })
        })
        .collect()
}

/// `N_f` with the lowest mean RMSE; ties go to the smaller subset.
pub fn best_subset_size(points: &[SweepPoint]) -> Option<usize> {
    points
        .iter()
        .filter_map(|p| p.mean_rmse.map(|m| (p.n_f, m)))
        .fold(None, |best: Option<(usize, f64)>, (n, m)| match best {
            Some((_, b)) if b <= m => best,
            _ => Some((n, m)),
        })
        .map(|(n, _)| n)
}

/// Writes `n_f,mean_rmse,std_rmse,n_failures` rows.
pub fn write_sweep_csv<W: std::io::Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["n_f", "mean_rmse", "std_rmse", "n_failures"])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for p in points {
        w.write_record([p.n_f.to_string(), opt(p.mean_rmse), opt(p.std_rmse), p.n_failures.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
