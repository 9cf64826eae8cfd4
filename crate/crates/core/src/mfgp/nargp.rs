use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::nested::check_nested;
use super::{FidelityLevel, LevelModel, MfgpKind, MfgpModel};
use crate::error::{Error, Result};
use crate::gp::{self, FitConfig, GpModel, Hyperparameters, PredictiveDistribution};
use crate::numerics::{DenseMatrix, KernelSpec, Lengthscales, NargpComposite, Rbf};
use crate::seed::{derive_seed, rng};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NargpConfig {
    pub gp: FitConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NargpPrediction {
    /// Substitute the lower-level posterior mean for `f_{t-1}(x*)`.
    MeanPropagation,
    /// Propagate `samples` draws of `f_{t-1}(x*)` and moment-match the mixture.
    MonteCarlo { samples: usize, seed: u64 },
}

impl NargpPrediction {
    pub fn monte_carlo(seed: u64) -> Self {
        NargpPrediction::MonteCarlo { samples: 100, seed }
    }
}

fn composite_template(dim: usize, ard: bool) -> Result<KernelSpec> {
    let rbf = |v: f64| -> Result<Rbf> {
        if ard {
            Rbf::ard(vec![0.5; dim], v)
        } else {
            Rbf::new(dim, Lengthscales::Shared(0.5), v)
        }
    };
    Ok(NargpComposite::new(rbf(1.0)?, Rbf::ard(vec![0.5], 1.0)?, rbf(0.1)?)?.into())
}

/// Level 1 is a plain GP; level `t ≥ 2` is a GP over `(x, E f*_{t-1}(x))`
/// with the composite kernel, hyperparameters by ML-II.
pub fn fit_nargp(levels: &[FidelityLevel], config: &NargpConfig) -> Result<MfgpModel> {
    check_nested(levels)?;
    for level in levels {
        if level.len() < 2 {
            return Err(Error::TooFewRows { needed: 2, found: level.len() });
        }
    }
    let base = gp::fit(&levels[0].x, &levels[0].y, &config.gp)?;
    let mut model = MfgpModel {
        kind: MfgpKind::Nargp,
        levels: vec![LevelModel::Base { gp: base }],
    };
    for level in &levels[1..] {
        let lower = predict_nargp(&model, &level.x)?.mean;
        let z = level.x.with_column(&lower)?;
        let gp = gp::fit_with_kernel(&z, &level.y, composite_template(level.x.cols(), config.gp.ard)?, &config.gp)?;
        model.levels.push(LevelModel::Nonlinear { gp });
    }
    Ok(model)
}

/// Builds a NARGP with fixed hyperparameters; every entry of `upper` must use
/// a [`KernelSpec::NargpComposite`] kernel.
pub fn nargp_with_hyperparameters(
    levels: &[FidelityLevel],
    base: Hyperparameters,
    upper: &[Hyperparameters],
) -> Result<MfgpModel> {
    check_nested(levels)?;
    if upper.len() + 1 != levels.len() {
        return Err(Error::DimensionMismatch {
            context: "per-level hyperparameters",
            expected: levels.len() - 1,
            got: upper.len(),
        });
    }
    if let KernelSpec::NargpComposite(_) = base.kernel {
        return Err(Error::InvalidHyperparameter("the composite kernel is only valid for levels t >= 2".into()));
    }
    let mut model = MfgpModel {
        kind: MfgpKind::Nargp,
        levels: vec![LevelModel::Base {
            gp: GpModel::from_hyperparameters(base, &levels[0].x, &levels[0].y)?,
        }],
    };
    for (level, hyper) in levels[1..].iter().zip(upper) {
        if !matches!(hyper.kernel, KernelSpec::NargpComposite(_)) {
            return Err(Error::InvalidHyperparameter("levels t >= 2 need the composite kernel".into()));
        }
        let lower = predict_nargp(&model, &level.x)?.mean;
        let z = level.x.with_column(&lower)?;
        let gp = GpModel::from_hyperparameters(hyper.clone(), &z, &level.y)?;
        model.levels.push(LevelModel::Nonlinear { gp });
    }
    Ok(model)
}

/// Deterministic mean propagation.
pub fn predict_nargp(model: &MfgpModel, x_star: &DenseMatrix) -> Result<PredictiveDistribution> {
    predict_nargp_with(model, x_star, NargpPrediction::MeanPropagation)
}

pub fn predict_nargp_with(model: &MfgpModel, x_star: &DenseMatrix, mode: NargpPrediction) -> Result<PredictiveDistribution> {
    model.check_kind(MfgpKind::Nargp)?;
    model.check_input(x_star)?;
    let ok = matches!(model.levels.first(), Some(LevelModel::Base { .. }))
        && model.levels[1..].iter().all(|l| matches!(l, LevelModel::Nonlinear { .. }));
    if !ok {
        return Err(Error::ModelFormat("NARGP levels must be one base level followed by nonlinear levels".into()));
    }
    let mut acc = gp::predict(model.levels[0].gp(), x_star)?;
    for (t, level) in model.levels.iter().enumerate().skip(1) {
        let gp = level.gp();
        acc = match mode {
            NargpPrediction::MeanPropagation => gp::predict(gp, &x_star.with_column(&acc.mean)?)?,
            NargpPrediction::MonteCarlo { samples, seed } => {
                if samples == 0 {
                    return Err(Error::Config("Monte Carlo prediction needs at least one sample".into()));
                }
                monte_carlo_level(gp, x_star, &acc, samples, derive_seed(seed, t as u64))?
            }
        };
    }
    Ok(acc)
}

fn monte_carlo_level(
    gp: &GpModel,
    x_star: &DenseMatrix,
    lower: &PredictiveDistribution,
    samples: usize,
    seed: u64,
) -> Result<PredictiveDistribution> {
    let mut r = rng(seed);
    let n = x_star.rows();
    let mut sum = vec![0.0; n];
    let mut sum_sq = vec![0.0; n];
    let mut sum_var = vec![0.0; n];
    let sd = lower.std_dev();
    for _ in 0..samples {
        let draw: Vec<f64> = lower
            .mean
            .iter()
            .zip(&sd)
            .map(|(m, s)| {
                let z: f64 = StandardNormal.sample(&mut r);
                m + s * z
            })
            .collect();
        let p = gp::predict(gp, &x_star.with_column(&draw)?)?;
        for i in 0..n {
            sum[i] += p.mean[i];
            sum_sq[i] += p.mean[i] * p.mean[i];
            sum_var[i] += p.variance[i];
        }
    }
    let s = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|v| v / s).collect();
    let variance = (0..n)
        .map(|i| gp::clamp_variance(sum_var[i] / s + sum_sq[i] / s - mean[i] * mean[i]))
        .collect();
    Ok(PredictiveDistribution { mean, variance })
}
