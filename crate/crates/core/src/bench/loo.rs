use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{fit_predict, prepare, validate, CellReport, ExperimentConfig, ExperimentData, ExperimentReport, Method, ReportMetadata, SeedOutcome, TestSet};
use crate::data::{fit_normalize, loo_splits, NormalizationReference, SplitPlan};
use crate::error::{Error, Result};
use crate::gp::FitConfig;
use crate::seed::derive_seed;

/// Prediction for one held-out row with its `mean ± 2σ` band, where σ
/// includes the observation noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooPoint {
    pub method: Method,
    pub row: usize,
    pub truth: f64,
    pub mean: f64,
    pub std_dev: f64,
    pub lower: f64,
    pub upper: f64,
    pub covered: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LooReport {
    pub report: ExperimentReport,
    pub points: Vec<LooPoint>,
}

impl LooReport {
    /// Fraction of held-out rows inside their band.
    pub fn coverage(&self, method: Method) -> Option<f64> {
        let pts: Vec<&LooPoint> = self.points.iter().filter(|p| p.method == method).collect();
        (!pts.is_empty()).then(|| pts.iter().filter(|p| p.covered).count() as f64 / pts.len() as f64)
    }

    pub fn write_points_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["method", "row", "truth", "mean", "std_dev", "lo2sd", "hi2sd", "covered"])?;
        for p in &self.points {
            w.write_record([
                p.method.name().to_string(),
                p.row.to_string(),
                p.truth.to_string(),
                p.mean.to_string(),
                p.std_dev.to_string(),
                p.lower.to_string(),
                p.upper.to_string(),
                p.covered.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn loo_cell(data: &ExperimentData, config: &ExperimentConfig, method: Method, plan: &SplitPlan, seed: u64) -> Result<LooPoint> {
    let global = match config.normalization {
        super::NormalizationMode::AllRows => Some(fit_normalize(&data.dataset, &NormalizationReference::AllRows)?),
        super::NormalizationMode::TrainOnly => None,
    };
    let p = prepare(data, config, plan, global.as_ref())?;
    let fit = FitConfig { seed, ..config.fit.clone() };
    let (pred, noise) = fit_predict(method, &p.ds, plan, &p.test_x, config, &fit)?;
    let (mut mean, mut var, mut truth) = (pred.mean[0], pred.variance[0] + noise, p.test_y[0]);
    if config.original_units {
        mean = p.stats.inverse_target(&[mean])[0];
        truth = p.stats.inverse_target(&[truth])[0];
        var = p.stats.inverse_target_variance(&[var])[0];
    }
    let sd = var.max(0.0).sqrt();
    let (lower, upper) = (mean - 2.0 * sd, mean + 2.0 * sd);
    Ok(LooPoint {
        method,
        row: plan.test_high[0],
        truth,
        mean,
        std_dev: sd,
        lower,
        upper,
        covered: lower <= truth && truth <= upper,
    })
}

/// Leave-one-out over the high-fidelity rows for every configured method.
/// `config.n_t` and `config.repeats` are ignored.
pub fn loo_report(data: &ExperimentData, config: &ExperimentConfig, jobs: usize) -> Result<LooReport> {
    if !matches!(data.test, TestSet::HeldOut) {
        return Err(Error::Config("leave-one-out needs held-out test rows".into()));
    }
    let plans = loo_splits(&data.dataset)?;
    let n_t = plans[0].n_t;
    let effective = ExperimentConfig { n_t: vec![n_t], repeats: plans.len(), ..config.clone() };
    validate(data, &effective)?;
    let cells: Vec<(Method, usize, &SplitPlan)> = config
        .methods
        .iter()
        .flat_map(|m| plans.iter().enumerate().map(move |(i, p)| (*m, i, p)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<(usize, u64, Result<LooPoint>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|(m, i, plan)| {
                let seed = derive_seed(config.seed, *i as u64);
                (*i, seed, loo_cell(data, config, *m, plan, seed))
            })
            .collect()
    });

    let mut points = Vec::new();
    let mut outcomes = Vec::new();
    for (i, seed, r) in results {
        let r = r.map(|p| {
            let err = (p.mean - p.truth).abs();
            points.push(p);
            err
        });
        outcomes.push(SeedOutcome::from_result(i, seed, r));
    }
    let mut it = outcomes.into_iter();
    let cells = config
        .methods
        .iter()
        .map(|m| CellReport::new(*m, n_t, it.by_ref().take(plans.len()).collect()))
        .collect();
    let mut metadata = ReportMetadata::new(data, &effective, None);
    metadata.repeat_seeds = (0..plans.len()).map(|i| derive_seed(config.seed, i as u64)).collect();
    Ok(LooReport {
        report: ExperimentReport { metadata, cells },
        points,
    })
}
