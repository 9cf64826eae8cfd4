//! Multi-fidelity Gaussian process regression.
//!
//! * [`numerics`]: dense matrices, RBF kernels, Cholesky factorization.
//! * [`gp`]: single-fidelity GP with ML-II hyperparameter fitting.
//! * [`mfgp`]: linear (LARGP) and nonlinear (NARGP) autoregressive
//!   multi-fidelity models over an ordered hierarchy of fidelity levels.
//! * [`featsel`]: discretization, mutual information and MRMR ranking.
//! * [`data`]: CSV ingestion, normalization, train/test splits and PCA.
//! * [`bench`]: baselines, synthetic benchmark tasks and the repeated-split
//!   experiment runner.

pub mod bench;
pub mod data;
pub mod error;
pub mod featsel;
pub mod gp;
pub mod mfgp;
pub mod model_file;
pub mod numerics;
pub mod seed;

#[cfg(test)]
#[path = "../tests/common/mod.rs"]
mod oracle;

pub use error::{Error, Result};
pub use gp::{FitConfig, GpModel, Hyperparameters, PredictiveDistribution};
pub use numerics::{CholeskyFactor, DenseMatrix, KernelSpec};
pub use bench::{Method, TrainedModel};
pub use data::Dataset;
pub use mfgp::{FidelityLevel, MfgpModel};
pub use model_file::ModelEnvelope;
