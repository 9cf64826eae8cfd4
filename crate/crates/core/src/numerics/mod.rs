//! Dense linear algebra and kernel evaluation shared by the model modules.

mod cholesky;
mod kernel;
mod matrix;
#[cfg(test)]
mod props;

pub use cholesky::{cho_solve, cholesky, cholesky_with_policy, log_det, CholeskyFactor, JitterPolicy};
pub use kernel::{cross_covariance, gram_matrix, kernel_eval, KernelSpec, Lengthscales, NargpComposite, Rbf};
pub use matrix::DenseMatrix;

/// Arithmetic mean; 0 for an empty slice.
pub fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Population variance; 0 for fewer than two values.
pub fn variance(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / v.len() as f64
}
