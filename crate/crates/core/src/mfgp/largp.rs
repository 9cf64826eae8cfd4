use serde::{Deserialize, Serialize};

use super::nested::check_nested;
use super::{FidelityLevel, LevelModel, MfgpKind, MfgpModel};
use crate::error::{Error, Result};
use crate::gp::{self, default_kernel, FitConfig, GpModel, Hyperparameters, LinearMean, ParamMode, PredictiveDistribution, Problem};
use crate::numerics::{variance, DenseMatrix};

const RHO_LIMIT_FACTOR: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LargpConfig {
    /// Used for every level, including level 1.
    pub gp: FitConfig,
    /// Scale ρ_t for levels t ≥ 2.
    pub rho: ParamMode,
    /// Offset μ_t for levels t ≥ 2.
    pub mu: ParamMode,
}

impl Default for LargpConfig {
    fn default() -> Self {
        LargpConfig {
            gp: FitConfig::default(),
            rho: ParamMode::Free,
            mu: ParamMode::Free,
        }
    }
}

fn check_min_points(levels: &[FidelityLevel]) -> Result<()> {
    for level in levels {
        if level.len() < 2 {
            return Err(Error::TooFewRows { needed: 2, found: level.len() });
        }
    }
    Ok(())
}

/// Fits levels bottom-up. Level `t ≥ 2` maximizes the marginal likelihood of
/// `y_t − ρ_t·E f*_{t-1}(X_t) − μ_t` over ρ_t, μ_t and the δ_t hyperparameters.
pub fn fit_largp(levels: &[FidelityLevel], config: &LargpConfig) -> Result<MfgpModel> {
    check_nested(levels)?;
    check_min_points(levels)?;
    let base = gp::fit(&levels[0].x, &levels[0].y, &config.gp)?;
    let mut model = MfgpModel {
        kind: MfgpKind::Largp,
        levels: vec![LevelModel::Base { gp: base }],
    };
    for (below, level) in levels.iter().zip(&levels[1..]) {
        let h = predict_largp(&model, &level.x)?.mean;
        let gp = Problem {
            x: &level.x,
            y: &level.y,
            kernel: default_kernel(level.x.cols(), config.gp.ard)?,
            mean: config.mu,
            covariate: Some((&h, config.rho)),
            scale_limit: rho_limit(&below.y, &level.y),
        }
        .fit(&config.gp)?;
        let rho = gp.linear_mean.as_ref().map_or(0.0, |l| l.scale);
        model.levels.push(LevelModel::Linear { rho, gp });
    }
    Ok(model)
}

/// Largest `|ρ_t|` the fit may use: `RHO_LIMIT_FACTOR` times the ratio of the
/// observed target spreads of the two levels.
pub(crate) fn rho_limit(below: &[f64], above: &[f64]) -> f64 {
    let (lo, hi) = (variance(below).sqrt(), variance(above).sqrt());
    if lo > 0.0 {
        RHO_LIMIT_FACTOR * hi / lo
    } else {
        f64::INFINITY
    }
}

/// Builds a LARGP with fixed hyperparameters: `base` for level 1 and one
/// `(hyperparameters, ρ_t)` pair for each higher level (μ_t is the mean
/// constant of those hyperparameters).
pub fn largp_with_hyperparameters(
    levels: &[FidelityLevel],
    base: Hyperparameters,
    upper: &[(Hyperparameters, f64)],
) -> Result<MfgpModel> {
    check_nested(levels)?;
    if upper.len() + 1 != levels.len() {
        return Err(Error::DimensionMismatch {
            context: "per-level hyperparameters",
            expected: levels.len() - 1,
            got: upper.len(),
        });
    }
    let mut model = MfgpModel {
        kind: MfgpKind::Largp,
        levels: vec![LevelModel::Base {
            gp: GpModel::from_hyperparameters(base, &levels[0].x, &levels[0].y)?,
        }],
    };
    for (level, (hyper, rho)) in levels[1..].iter().zip(upper) {
        let h = predict_largp(&model, &level.x)?.mean;
        let gp = GpModel::from_parts(
            hyper.clone(),
            &level.x,
            &level.y,
            Some(LinearMean { scale: *rho, covariate: h }),
        )?;
        model.levels.push(LevelModel::Linear { rho: *rho, gp });
    }
    Ok(model)
}

/// `E_t = ρ_t E_{t-1}(x*) + μ_t + k*ᵀ(K_t+σ_t²I)⁻¹(y_t − ρ_t E_{t-1}(X_t) − μ_t)`,
/// `V_t = ρ_t² V_{t-1}(x*) + k(x*,x*) − k*ᵀ(K_t+σ_t²I)⁻¹k*`.
pub fn predict_largp(model: &MfgpModel, x_star: &DenseMatrix) -> Result<PredictiveDistribution> {
    model.check_kind(MfgpKind::Largp)?;
    model.check_input(x_star)?;
    validate_stack(model)?;
    let mut acc = gp::predict(model.levels[0].gp(), x_star)?;
    for level in &model.levels[1..] {
        let LevelModel::Linear { rho, gp } = level else {
            unreachable!("validated above");
        };
        let delta = gp::predict(gp, x_star)?;
        for i in 0..acc.len() {
            acc.mean[i] = rho * acc.mean[i] + delta.mean[i];
            acc.variance[i] = gp::clamp_variance(rho * rho * acc.variance[i] + delta.variance[i]);
        }
    }
    Ok(acc)
}

fn validate_stack(model: &MfgpModel) -> Result<()> {
    let ok = matches!(model.levels.first(), Some(LevelModel::Base { .. }))
        && model.levels[1..].iter().all(|l| matches!(l, LevelModel::Linear { .. }));
    if ok {
        Ok(())
    } else {
        Err(Error::ModelFormat("LARGP levels must be one base level followed by linear levels".into()))
    }
}

