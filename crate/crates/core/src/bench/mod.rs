//! Baselines, synthetic two-level tasks and the repeated-split experiment
//! runner.
//!
//! Every `(method, N_t, repeat)` cell is independent: the split for repeat `i`
//! comes from the derived seed `(seed, i)` and the same seed drives the model
//! fit, so reports do not depend on how cells are scheduled.

mod loo;
mod report;
mod synthetic;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{
    apply_normalize, fit_normalize, make_splits, Dataset, NormalizationReference, NormalizationStats, SplitPlan,
};
use crate::error::{Error, Result};
use crate::featsel::{rank_features, DiscretizationMethod};
use crate::gp::{self, FitConfig, GpModel, PredictiveDistribution};
use crate::mfgp::{ensure_nested, fit_largp, fit_nargp, ImputationMode, LargpConfig, MfgpModel, NargpConfig, NestingConfig};
use crate::numerics::DenseMatrix;

pub use loo::{loo_report, LooPoint, LooReport};
pub use report::{CellReport, ExperimentReport, ReportMetadata, SeedOutcome};
pub use synthetic::{gp_prior_dataset, make_synthetic, sample_gp_prior, uniform_grid, LinkType, SyntheticTask};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// GP on the level just below the top, all rows.
    GpLow,
    /// GP on the high-fidelity training rows.
    GpHigh,
    /// GP on all training rows with the fidelity indicator as an extra input.
    GpAug,
    Largp,
    Nargp,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::GpLow, Method::GpHigh, Method::GpAug, Method::Largp, Method::Nargp];

    pub fn name(self) -> &'static str {
        match self {
            Method::GpLow => "gp-low",
            Method::GpHigh => "gp-high",
            Method::GpAug => "gp-aug",
            Method::Largp => "largp",
            Method::Nargp => "nargp",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Method::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionScope {
    /// Rank once on every row of the dataset.
    #[default]
    Global,
    /// Rank on the training rows of each split.
    PerSplit,
}

/// Restrict every model to the top `n_features` MRMR-ranked columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSelection {
    pub n_features: usize,
    pub n_bins: usize,
    pub method: DiscretizationMethod,
    pub scope: SelectionScope,
}

impl FeatureSelection {
    pub fn top(n_features: usize) -> Self {
        FeatureSelection {
            n_features,
            n_bins: 5,
            method: DiscretizationMethod::EqualFrequency,
            scope: SelectionScope::Global,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalizationMode {
    /// Min/max over every row of the dataset.
    #[default]
    AllRows,
    /// Min/max over the training rows of each split.
    TrainOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub n_t: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    /// Fit settings shared by every model; the seed is replaced per repeat.
    pub fit: FitConfig,
    pub imputation: ImputationMode,
    /// GP-Aug indicator per level; defaults to `(t − 1)/(L − 1)`.
    pub indicator: Option<Vec<f64>>,
    pub feature_selection: Option<FeatureSelection>,
    pub normalization: NormalizationMode,
    /// Report RMSE in target units instead of on the normalized scale.
    pub original_units: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            methods: Method::ALL.to_vec(),
            n_t: vec![6, 10, 14],
            repeats: 30,
            seed: 0,
            fit: FitConfig { estimate_mean: true, ..FitConfig::default() },
            imputation: ImputationMode::PosteriorMean,
            indicator: None,
            feature_selection: None,
            normalization: NormalizationMode::AllRows,
            original_units: false,
        }
    }
}

/// Held-out rows of the dataset, or a fixed set of high-fidelity test points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestSet {
    HeldOut,
    Fixed { x: DenseMatrix, y: Vec<f64> },
}

/// Raw (unnormalized) data for an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentData {
    pub dataset: Dataset,
    pub test: TestSet,
    pub description: String,
}

impl ExperimentData {
    pub fn from_dataset(dataset: Dataset) -> Self {
        let description = dataset.provenance.source.clone().unwrap_or_else(|| "dataset".into());
        ExperimentData { dataset, test: TestSet::HeldOut, description }
    }

    /// Low level on an `n_low` grid, a high-fidelity pool at the same grid
    /// points, and a noise-free `n_test`-point high-fidelity test grid.
    pub fn synthetic(task: &SyntheticTask, n_low: usize, n_test: usize, seed: u64) -> Result<Self> {
        let pool = make_synthetic(task, n_low, n_low, seed)?;
        let dataset = Dataset::from_levels(&pool, vec!["x".into()])?;
        let grid = uniform_grid(n_test);
        Ok(ExperimentData {
            dataset,
            test: TestSet::Fixed {
                x: DenseMatrix::column(&grid)?,
                y: grid.iter().map(|x| task.high(*x)).collect(),
            },
            description: format!("synthetic:{}:n_low={n_low}:seed={seed}", task.name),
        })
    }

    /// Keeps only the given feature columns (in the given order).
    pub fn restrict_features(&self, idx: &[usize]) -> Result<Self> {
        if let Some(bad) = idx.iter().find(|j| **j >= self.dataset.n_features()) {
            return Err(Error::Config(format!("feature index {bad} out of range")));
        }
        Ok(ExperimentData {
            dataset: self.dataset.select_features(idx),
            test: match &self.test {
                TestSet::HeldOut => TestSet::HeldOut,
                TestSet::Fixed { x, y } => TestSet::Fixed { x: x.select_cols(idx), y: y.clone() },
            },
            description: self.description.clone(),
        })
    }

    /// SHA-256 over the dataset and any fixed test set.
    pub fn content_hash(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        h.update(self.dataset.content_hash().as_bytes());
        if let TestSet::Fixed { x, y } = &self.test {
            for v in x.entries().iter().chain(y) {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// `sqrt(mean((pred − truth)²))`.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            context: "rmse",
            expected: truth.len(),
            got: pred.len(),
        });
    }
    if pred.is_empty() {
        return Err(Error::EmptyInput("rmse"));
    }
    let sse: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((sse / pred.len() as f64).sqrt())
}

/// Per-level GP-Aug indicator values.
pub fn indicator_values(config: &ExperimentConfig, n_levels: usize) -> Result<Vec<f64>> {
    match &config.indicator {
        Some(v) if v.len() == n_levels => Ok(v.clone()),
        Some(v) => Err(Error::Config(format!("indicator has {} values for {n_levels} levels", v.len()))),
        None if n_levels == 1 => Ok(vec![0.0]),
        None => Ok((0..n_levels).map(|t| t as f64 / (n_levels - 1) as f64).collect()),
    }
}

/// Dataset rows a method trains on under `plan`.
pub fn training_rows(method: Method, ds: &Dataset, plan: &SplitPlan) -> Vec<usize> {
    match method {
        Method::GpLow => {
            let below = ds.n_levels().saturating_sub(1);
            plan.low.iter().copied().filter(|i| ds.fidelity[*i] == below).collect()
        }
        Method::GpHigh => plan.train_high.clone(),
        Method::GpAug | Method::Largp | Method::Nargp => plan.train_rows(),
    }
}

fn validate(data: &ExperimentData, config: &ExperimentConfig) -> Result<()> {
    if config.methods.is_empty() {
        return Err(Error::Config("no methods given".into()));
    }
    if config.n_t.is_empty() {
        return Err(Error::Config("no N_t values given".into()));
    }
    if config.repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    let ds = &data.dataset;
    if ds.n_levels() < 2 && config.methods.contains(&Method::GpLow) {
        return Err(Error::Config("gp-low needs at least two fidelity levels".into()));
    }
    indicator_values(config, ds.n_levels())?;
    if let TestSet::Fixed { x, y } = &data.test {
        if x.cols() != ds.n_features() || x.rows() != y.len() {
            return Err(Error::Config("fixed test set does not match the dataset".into()));
        }
    }
    if let Some(fs) = &config.feature_selection {
        if fs.n_features == 0 || fs.n_features > ds.n_features() {
            return Err(Error::Config(format!(
                "cannot select {} of {} features",
                fs.n_features,
                ds.n_features()
            )));
        }
    }
    Ok(())
}

/// Normalized training dataset plus normalized test inputs/targets of a split.
struct Prepared {
    ds: Dataset,
    test_x: DenseMatrix,
    test_y: Vec<f64>,
    stats: NormalizationStats,
}

fn prepare(data: &ExperimentData, config: &ExperimentConfig, plan: &SplitPlan, global: Option<&NormalizationStats>) -> Result<Prepared> {
    let stats = match (config.normalization, global) {
        (NormalizationMode::AllRows, Some(s)) => s.clone(),
        (NormalizationMode::AllRows, None) => fit_normalize(&data.dataset, &NormalizationReference::AllRows)?,
        (NormalizationMode::TrainOnly, _) => {
            fit_normalize(&data.dataset, &NormalizationReference::TrainOnly(plan.clone()))?
        }
    };
    let ds = apply_normalize(&data.dataset, &stats)?;
    let (test_x, test_y) = match &data.test {
        TestSet::HeldOut => (ds.x.select_rows(&plan.test_high), plan.test_high.iter().map(|i| ds.y[*i]).collect()),
        TestSet::Fixed { x, y } => (stats.transform_features(x)?, stats.transform_target(y)),
    };
    Ok(Prepared { ds, test_x, test_y, stats })
}

fn augment(x: &DenseMatrix, tags: &[usize], indicator: &[f64]) -> Result<DenseMatrix> {
    x.with_column(&tags.iter().map(|t| indicator[t - 1]).collect::<Vec<_>>())
}

/// A fitted baseline or multi-fidelity model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "structure")]
pub enum TrainedModel {
    Gp { gp: GpModel },
    /// GP whose last input is the fidelity indicator; predictions use `indicator`.
    Augmented { gp: GpModel, indicator: f64 },
    Multi { model: MfgpModel },
}

impl TrainedModel {
    /// Number of inputs expected by [`TrainedModel::predict`].
    pub fn input_dim(&self) -> usize {
        match self {
            TrainedModel::Gp { gp } => gp.input_dim(),
            TrainedModel::Augmented { gp, .. } => gp.input_dim() - 1,
            TrainedModel::Multi { model } => model.input_dim(),
        }
    }

    /// Latent predictive distribution at the highest fidelity.
    pub fn predict(&self, x: &DenseMatrix) -> Result<PredictiveDistribution> {
        match self {
            TrainedModel::Gp { gp } => gp::predict(gp, x),
            TrainedModel::Augmented { gp, indicator } => {
                if x.cols() + 1 != gp.input_dim() {
                    return Err(Error::DimensionMismatch {
                        context: "prediction inputs",
                        expected: gp.input_dim() - 1,
                        got: x.cols(),
                    });
                }
                gp::predict(gp, &x.with_column(&vec![*indicator; x.rows()])?)
            }
            TrainedModel::Multi { model } => model.predict(x),
        }
    }

    /// Observation noise variance of the top-level model.
    pub fn noise_variance(&self) -> f64 {
        match self {
            TrainedModel::Gp { gp } | TrainedModel::Augmented { gp, .. } => gp.hyper.noise_variance,
            TrainedModel::Multi { model } => model.levels.last().map_or(0.0, |l| l.gp().hyper.noise_variance),
        }
    }

    /// Largest diagonal jitter used by any factorization.
    pub fn jitter_used(&self) -> f64 {
        match self {
            TrainedModel::Gp { gp } | TrainedModel::Augmented { gp, .. } => gp.jitter_used(),
            TrainedModel::Multi { model } => model.max_jitter(),
        }
    }
}

/// Fits `method` on the given rows of a (normalized) dataset. LARGP and NARGP
/// impute missing lower-level rows first.
pub fn fit_method(
    method: Method,
    ds: &Dataset,
    rows: &[usize],
    fit: &FitConfig,
    imputation: ImputationMode,
    indicator: &[f64],
) -> Result<TrainedModel> {
    let x = ds.x.select_rows(rows);
    let y: Vec<f64> = rows.iter().map(|i| ds.y[*i]).collect();
    match method {
        Method::GpLow | Method::GpHigh => Ok(TrainedModel::Gp { gp: gp::fit(&x, &y, fit)? }),
        Method::GpAug => {
            if indicator.len() != ds.n_levels() {
                return Err(Error::Config(format!("indicator has {} values for {} levels", indicator.len(), ds.n_levels())));
            }
            let tags: Vec<usize> = rows.iter().map(|i| ds.fidelity[*i]).collect();
            Ok(TrainedModel::Augmented {
                gp: gp::fit(&augment(&x, &tags, indicator)?, &y, fit)?,
                indicator: indicator[ds.n_levels() - 1],
            })
        }
        Method::Largp | Method::Nargp => {
            let levels = ds.levels_from(rows)?;
            let nested = ensure_nested(&levels, &NestingConfig { fit: fit.clone(), mode: imputation })?;
            let model = if method == Method::Largp {
                fit_largp(&nested.levels, &LargpConfig { gp: fit.clone(), ..LargpConfig::default() })?
            } else {
                fit_nargp(&nested.levels, &NargpConfig { gp: fit.clone() })?
            };
            Ok(TrainedModel::Multi { model })
        }
    }
}

fn fit_predict(
    method: Method,
    ds: &Dataset,
    plan: &SplitPlan,
    test_x: &DenseMatrix,
    config: &ExperimentConfig,
    fit: &FitConfig,
) -> Result<(PredictiveDistribution, f64)> {
    let indicator = indicator_values(config, ds.n_levels())?;
    let model = fit_method(method, ds, &training_rows(method, ds, plan), fit, config.imputation, &indicator)?;
    Ok((model.predict(test_x)?, model.noise_variance()))
}

fn select_columns(ds: &Dataset, rows: &[usize], fs: &FeatureSelection) -> Result<Vec<usize>> {
    let sub = ds.select_rows(rows);
    Ok(rank_features(&sub.x, &sub.y, fs.n_bins, fs.method)?.top(fs.n_features))
}

/// Outcome of one cell: RMSE on the chosen scale.
fn run_cell(
    data: &ExperimentData,
    config: &ExperimentConfig,
    method: Method,
    plan: &SplitPlan,
    global_stats: Option<&NormalizationStats>,
    global_features: Option<&[usize]>,
) -> Result<f64> {
    let mut p = prepare(data, config, plan, global_stats)?;
    let columns = match (&config.feature_selection, global_features) {
        (Some(fs), _) if fs.scope == SelectionScope::PerSplit => Some(select_columns(&p.ds, &plan.train_rows(), fs)?),
        (_, Some(cols)) => Some(cols.to_vec()),
        _ => None,
    };
    if let Some(cols) = &columns {
        p.ds = p.ds.select_features(cols);
        p.test_x = p.test_x.select_cols(cols);
    }
    let fit = FitConfig { seed: plan.seed, ..config.fit.clone() };
    let (pred, _) = fit_predict(method, &p.ds, plan, &p.test_x, config, &fit)?;
    if config.original_units {
        rmse(&p.stats.inverse_target(&pred.mean), &p.stats.inverse_target(&p.test_y))
    } else {
        rmse(&pred.mean, &p.test_y)
    }
}

fn global_selection(data: &ExperimentData, config: &ExperimentConfig, stats: Option<&NormalizationStats>) -> Result<Option<Vec<usize>>> {
    match &config.feature_selection {
        Some(fs) if fs.scope == SelectionScope::Global => {
            let ds = match stats {
                Some(s) => apply_normalize(&data.dataset, s)?,
                None => data.dataset.clone(),
            };
            Ok(Some(select_columns(&ds, &(0..ds.n_rows()).collect::<Vec<_>>(), fs)?))
        }
        _ => Ok(None),
    }
}

/// Runs every `(method, N_t, repeat)` cell on a pool of `jobs` threads
/// (`0` = rayon default). Fit failures are recorded per seed.
pub fn run_experiment(data: &ExperimentData, config: &ExperimentConfig, jobs: usize) -> Result<ExperimentReport> {
    validate(data, config)?;
    let plans: Vec<Vec<SplitPlan>> = config
        .n_t
        .iter()
        .map(|&n_t| make_splits(&data.dataset, n_t, config.repeats, config.seed))
        .collect::<Result<_>>()?;
    let global_stats = match config.normalization {
        NormalizationMode::AllRows => Some(fit_normalize(&data.dataset, &NormalizationReference::AllRows)?),
        NormalizationMode::TrainOnly => None,
    };
    let global_features = global_selection(data, config, global_stats.as_ref())?;

    let mut cells = Vec::new();
    for &method in &config.methods {
        for (k, &n_t) in config.n_t.iter().enumerate() {
            for (repeat, plan) in plans[k].iter().enumerate() {
                cells.push((method, n_t, repeat, plan));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let outcomes: Vec<SeedOutcome> = pool.install(|| {
        cells
            .par_iter()
            .map(|(method, _, repeat, plan)| {
                let result = run_cell(data, config, *method, plan, global_stats.as_ref(), global_features.as_deref());
                SeedOutcome::from_result(*repeat, plan.seed, result)
            })
            .collect()
    });

    let mut out = outcomes.into_iter();
    let mut reports = Vec::new();
    for &method in &config.methods {
        for &n_t in &config.n_t {
            let seeds: Vec<SeedOutcome> = out.by_ref().take(config.repeats).collect();
            reports.push(CellReport::new(method, n_t, seeds));
        }
    }
    Ok(ExperimentReport {
        metadata: ReportMetadata::new(data, config, global_features),
        cells: reports,
    })
}
