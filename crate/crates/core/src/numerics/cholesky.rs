use serde::{Deserialize, Serialize};

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

/// Diagonal jitter escalation: start at the requested jitter, and on failure
/// move to `initial` (if below it) and then up by ×10 until `cap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JitterPolicy {
    pub initial: f64,
    pub cap: f64,
}

impl Default for JitterPolicy {
    fn default() -> Self {
        JitterPolicy {
            initial: 1e-10,
            cap: 1e-4,
        }
    }
}

/// Lower-triangular `L` with `L·Lᵀ = A + jitter·I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FactorRaw")]
pub struct CholeskyFactor {
    lower: DenseMatrix,
    jitter: f64,
}

#[derive(Deserialize)]
struct FactorRaw {
    lower: DenseMatrix,
    jitter: f64,
}

impl TryFrom<FactorRaw> for CholeskyFactor {
    type Error = Error;
    fn try_from(r: FactorRaw) -> Result<Self> {
        let l = &r.lower;
        if !l.is_square() {
            return Err(Error::ModelFormat("Cholesky factor is not square".into()));
        }
        for i in 0..l.rows() {
            if l.get(i, i) <= 0.0 {
                return Err(Error::ModelFormat("Cholesky factor has non-positive diagonal".into()));
            }
            if (i + 1..l.cols()).any(|j| l.get(i, j) != 0.0) {
                return Err(Error::ModelFormat("Cholesky factor is not lower triangular".into()));
            }
        }
        Ok(CholeskyFactor {
            lower: r.lower,
            jitter: r.jitter,
        })
    }
}

fn try_factor(a: &DenseMatrix, jitter: f64) -> Option<DenseMatrix> {
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let lj = l.row(j);
        let mut d = a.get(j, j) + jitter - lj[..j].iter().map(|v| v * v).sum::<f64>();
        if !(d > 0.0) || !d.is_finite() {
            return None;
        }
        d = d.sqrt();
        l.set(j, j, d);
        for i in j + 1..n {
            let s: f64 = l.row(i)[..j].iter().zip(&l.row(j)[..j]).map(|(x, y)| x * y).sum();
            l.set(i, j, (a.get(i, j) - s) / d);
        }
    }
    Some(l)
}

/// Factorizes `A + jitter·I` with the default [`JitterPolicy`].
pub fn cholesky(a: &DenseMatrix, jitter: f64) -> Result<CholeskyFactor> {
    cholesky_with_policy(a, jitter, JitterPolicy::default())
}

pub fn cholesky_with_policy(a: &DenseMatrix, jitter: f64, policy: JitterPolicy) -> Result<CholeskyFactor> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch {
            context: "cholesky (square input)",
            expected: a.rows(),
            got: a.cols(),
        });
    }
    if !(jitter >= 0.0) {
        return Err(Error::InvalidHyperparameter(format!("jitter must be >= 0, got {jitter}")));
    }
    let mut j = jitter;
    loop {
        if let Some(lower) = try_factor(a, j) {
            if j > jitter {
                log::debug!("cholesky succeeded after escalating jitter to {j:e}");
            }
            return Ok(CholeskyFactor { lower, jitter: j });
        }
        j = if j < policy.initial { policy.initial } else { j * 10.0 };
        if j > policy.cap * (1.0 + 1e-9) {
            return Err(Error::NotPositiveDefinite { cap: policy.cap });
        }
    }
}

impl CholeskyFactor {
    pub fn dim(&self) -> usize {
        self.lower.rows()
    }

    pub fn lower(&self) -> &DenseMatrix {
        &self.lower
    }

    /// Diagonal jitter that was added to make the factorization succeed.
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "cholesky solve",
                expected: self.dim(),
                got: n,
            });
        }
        Ok(())
    }

    /// Solves `L·x = b`.
    pub fn solve_lower(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(b.len())?;
        let n = self.dim();
        let mut x = b.to_vec();
        for i in 0..n {
            let row = self.lower.row(i);
            let s: f64 = row[..i].iter().zip(&x[..i]).map(|(l, v)| l * v).sum();
            x[i] = (x[i] - s) / row[i];
        }
        Ok(x)
    }

    /// Solves `Lᵀ·x = b`.
    pub fn solve_upper(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.check_len(b.len())?;
        let n = self.dim();
        let mut x = b.to_vec();
        for i in (0..n).rev() {
            let mut s = 0.0;
            for k in i + 1..n {
                s += self.lower.get(k, i) * x[k];
            }
            x[i] = (x[i] - s) / self.lower.get(i, i);
        }
        Ok(x)
    }

    /// Solves `(L·Lᵀ)·x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.solve_upper(&self.solve_lower(b)?)
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.lower.get(i, i).ln()).sum::<f64>()
    }

    /// `(L·Lᵀ)⁻¹`, column by column.
    pub fn inverse(&self) -> DenseMatrix {
        let n = self.dim();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = 0.0);
            e[j] = 1.0;
            let col = self.solve(&e).expect("dimension checked");
            for (i, v) in col.into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        inv
    }

    /// `L·Lᵀ`
    pub fn reconstruct(&self) -> DenseMatrix {
        self.lower
            .matmul(&self.lower.transpose())
            .expect("square factor")
    }
}

/// Free-function form of [`CholeskyFactor::solve`].
pub fn cho_solve(l: &CholeskyFactor, b: &[f64]) -> Result<Vec<f64>> {
    l.solve(b)
}

/// `log |L·Lᵀ| = 2 Σ log L_ii`
pub fn log_det(l: &CholeskyFactor) -> f64 {
    l.log_det()
}
