//! Multi-fidelity GP models over an ordered hierarchy of fidelity levels.
//!
//! Both models are fitted recursively, lowest level first. Level 1 is a plain
//! GP. For level `t ≥ 2`:
//!
//! * LARGP: `f_t(x) = ρ_t f*_{t-1}(x) + δ_t(x)`, where `δ_t` is a GP with
//!   constant mean `μ_t`; `ρ_t` and `μ_t` are fitted jointly with the kernel
//!   hyperparameters of `δ_t`.
//! * NARGP: `f_t(x) = F_t(x, f*_{t-1}(x))`, a GP over the input augmented with
//!   the lower-level posterior mean, using the composite kernel
//!   `K_d(x,x')·K_f(f,f') + K_b(x,x')`.
//!
//! `f*_{t-1}` is the already-fitted lower-level posterior; the recursion
//! needs every level-`t` training input to exist at level `t-1` (nested
//! data), see [`ensure_nested`].

mod largp;
mod nargp;
mod nested;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gp::{GpModel, PredictiveDistribution};
use crate::numerics::DenseMatrix;

pub use largp::{fit_largp, largp_with_hyperparameters, predict_largp, LargpConfig};
pub use nargp::{fit_nargp, nargp_with_hyperparameters, predict_nargp, predict_nargp_with, NargpConfig, NargpPrediction};
pub use nested::{check_nested, ensure_nested, ImputationMode, ImputedRow, Nested, NestingConfig, NESTING_TOLERANCE};

/// Training data of one fidelity level; `index` is 1-based, 1 = lowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FidelityLevel {
    pub index: usize,
    pub x: DenseMatrix,
    pub y: Vec<f64>,
}

impl FidelityLevel {
    pub fn new(index: usize, x: DenseMatrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() != y.len() {
            return Err(Error::DimensionMismatch {
                context: "fidelity level targets",
                expected: x.rows(),
                got: y.len(),
            });
        }
        Ok(FidelityLevel { index, x, y })
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }
}

/// Checks indices are exactly `1..=L` in order and dimensions agree.
pub fn validate_levels(levels: &[FidelityLevel]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::EmptyInput("fidelity levels"));
    }
    let dim = levels[0].x.cols();
    for (pos, level) in levels.iter().enumerate() {
        if level.index != pos + 1 {
            return Err(Error::LevelOrder {
                position: pos,
                found: level.index,
            });
        }
        if level.x.cols() != dim {
            return Err(Error::DimensionMismatch {
                context: "fidelity level feature dimension",
                expected: dim,
                got: level.x.cols(),
            });
        }
        if level.x.rows() != level.y.len() {
            return Err(Error::DimensionMismatch {
                context: "fidelity level targets",
                expected: level.x.rows(),
                got: level.y.len(),
            });
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MfgpKind {
    Largp,
    Nargp,
}

impl MfgpKind {
    pub fn name(self) -> &'static str {
        match self {
            MfgpKind::Largp => "largp",
            MfgpKind::Nargp => "nargp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "type")]
pub enum LevelModel {
    /// `f_1 = δ_1`
    Base { gp: GpModel },
    /// `f_t = ρ_t f*_{t-1} + δ_t`; `μ_t` lives in the GP's mean constant.
    Linear { rho: f64, gp: GpModel },
    /// GP over `(x, E f*_{t-1}(x))` with the composite kernel.
    Nonlinear { gp: GpModel },
}

impl LevelModel {
    pub fn gp(&self) -> &GpModel {
        match self {
            LevelModel::Base { gp } | LevelModel::Linear { gp, .. } | LevelModel::Nonlinear { gp } => gp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfgpModel {
    pub kind: MfgpKind,
    pub levels: Vec<LevelModel>,
}

impl MfgpModel {
    pub fn n_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn input_dim(&self) -> usize {
        self.levels[0].gp().input_dim()
    }

    /// `(ρ_t, μ_t)` for every linear level, in order.
    pub fn scale_and_offset(&self) -> Vec<(f64, f64)> {
        self.levels
            .iter()
            .filter_map(|l| match l {
                LevelModel::Linear { rho, gp } => Some((*rho, gp.hyper.mean_constant)),
                _ => None,
            })
            .collect()
    }

    /// Top-level prediction with the model's default path.
    pub fn predict(&self, x_star: &DenseMatrix) -> Result<PredictiveDistribution> {
        match self.kind {
            MfgpKind::Largp => predict_largp(self, x_star),
            MfgpKind::Nargp => predict_nargp(self, x_star),
        }
    }

    /// Largest diagonal jitter used by any level's factorization.
    pub fn max_jitter(&self) -> f64 {
        self.levels.iter().map(|l| l.gp().jitter_used()).fold(0.0, f64::max)
    }

    pub(crate) fn check_kind(&self, expected: MfgpKind) -> Result<()> {
        if self.kind != expected {
            return Err(Error::KindMismatch {
                expected: expected.name(),
                got: self.kind.name(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_input(&self, x_star: &DenseMatrix) -> Result<()> {
        if x_star.cols() != self.input_dim() {
            return Err(Error::DimensionMismatch {
                context: "prediction inputs",
                expected: self.input_dim(),
                got: x_star.cols(),
            });
        }
        Ok(())
    }
}
