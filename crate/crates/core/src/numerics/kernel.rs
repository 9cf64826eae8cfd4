//! Squared-exponential (RBF) kernels and the composite kernel used by the
//! nonlinear autoregressive model.
//!
//! Hyperparameters are exposed to optimizers as a flat vector of logarithms so
//! that positivity never has to be enforced explicitly. Layouts:
//!
//! * `Rbf`: `[ln λ_1, .., ln λ_m, ln s²]` where `m` is the input dimension in
//!   ARD mode and 1 in shared mode.
//! * `NargpComposite`: interaction block (`Rbf` over x), then `ln λ_f` of the
//!   output block (its variance is pinned to 1, since it multiplies the
//!   interaction variance), then the bias block (`Rbf` over x).

use serde::{Deserialize, Serialize};

use super::matrix::DenseMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Lengthscales {
    /// One lengthscale per input dimension.
    Ard(Vec<f64>),
    /// A single lengthscale shared by every dimension.
    Shared(f64),
}

impl Lengthscales {
    pub fn as_slice(&self) -> &[f64] {
        match self {
            Lengthscales::Ard(v) => v,
            Lengthscales::Shared(l) => std::slice::from_ref(l),
        }
    }

    fn as_mut_slice(&mut self) -> &mut [f64] {
        match self {
            Lengthscales::Ard(v) => v,
            Lengthscales::Shared(l) => std::slice::from_mut(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RbfRaw")]
pub struct Rbf {
    dim: usize,
    lengthscales: Lengthscales,
    variance: f64,
}

#[derive(Deserialize)]
struct RbfRaw {
    dim: usize,
    lengthscales: Lengthscales,
    variance: f64,
}

impl TryFrom<RbfRaw> for Rbf {
    type Error = Error;
    fn try_from(r: RbfRaw) -> Result<Self> {
        Rbf::new(r.dim, r.lengthscales, r.variance)
    }
}

fn check_positive(what: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidHyperparameter(format!(
            "{what} must be positive and finite, got {v}"
        )))
    }
}

impl Rbf {
    pub fn new(dim: usize, lengthscales: Lengthscales, variance: f64) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidHyperparameter("kernel dimension is zero".into()));
        }
        if let Lengthscales::Ard(v) = &lengthscales {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    context: "ARD lengthscales",
                    expected: dim,
                    got: v.len(),
                });
            }
        }
        for &l in lengthscales.as_slice() {
            check_positive("lengthscale", l)?;
        }
        check_positive("signal variance", variance)?;
        Ok(Rbf {
            dim,
            lengthscales,
            variance,
        })
    }

    pub fn ard(lengthscales: Vec<f64>, variance: f64) -> Result<Self> {
        Self::new(lengthscales.len(), Lengthscales::Ard(lengthscales), variance)
    }

    pub fn shared(dim: usize, lengthscale: f64, variance: f64) -> Result<Self> {
        Self::new(dim, Lengthscales::Shared(lengthscale), variance)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lengthscales(&self) -> &Lengthscales {
        &self.lengthscales
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    fn lengthscale(&self, d: usize) -> f64 {
        match &self.lengthscales {
            Lengthscales::Ard(v) => v[d],
            Lengthscales::Shared(l) => *l,
        }
    }

    /// Σ_d (a_d - b_d)² / λ_d²
    #[inline]
    fn scaled_sq_dist(&self, a: &[f64], b: &[f64]) -> f64 {
        match &self.lengthscales {
            Lengthscales::Ard(ls) => a
                .iter()
                .zip(b)
                .zip(ls)
                .map(|((x, y), l)| {
                    let t = (x - y) / l;
                    t * t
                })
                .sum(),
            Lengthscales::Shared(l) => {
                let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                s / (l * l)
            }
        }
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        self.variance * (-0.5 * self.scaled_sq_dist(a, b)).exp()
    }

    fn n_lengthscale_params(&self) -> usize {
        self.lengthscales.as_slice().len()
    }

    fn n_params(&self, with_variance: bool) -> usize {
        self.n_lengthscale_params() + usize::from(with_variance)
    }

    fn push_log_params(&self, out: &mut Vec<f64>, with_variance: bool) {
        out.extend(self.lengthscales.as_slice().iter().map(|l| l.ln()));
        if with_variance {
            out.push(self.variance.ln());
        }
    }

    fn set_log_params(&mut self, p: &[f64], with_variance: bool) -> Result<()> {
        let m = self.n_lengthscale_params();
        for (l, lp) in self.lengthscales.as_mut_slice().iter_mut().zip(&p[..m]) {
            *l = lp.exp();
            check_positive("lengthscale", *l)?;
        }
        if with_variance {
            self.variance = p[m].exp();
            check_positive("signal variance", self.variance)?;
        }
        Ok(())
    }

    /// Evaluates k(a, b) and writes ∂k/∂(log params) into `grad`.
    fn eval_grad(&self, a: &[f64], b: &[f64], grad: &mut [f64], with_variance: bool) -> f64 {
        let k = self.eval(a, b);
        match &self.lengthscales {
            Lengthscales::Ard(ls) => {
                for (d, l) in ls.iter().enumerate() {
                    let t = (a[d] - b[d]) / l;
                    grad[d] = k * t * t;
                }
            }
            Lengthscales::Shared(l) => {
                let s: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
                grad[0] = k * s / (l * l);
            }
        }
        if with_variance {
            grad[self.n_lengthscale_params()] = k;
        }
        k
    }
}

/// `K_d(x, x') · K_f(f, f') + K_b(x, x')` over inputs `z = (x, f)`, where `f` is
/// the lower-fidelity posterior mean appended as the last coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CompositeRaw")]
pub struct NargpComposite {
    interaction: Rbf,
    output: Rbf,
    bias: Rbf,
}

#[derive(Deserialize)]
struct CompositeRaw {
    interaction: Rbf,
    output: Rbf,
    bias: Rbf,
}

impl TryFrom<CompositeRaw> for NargpComposite {
    type Error = Error;
    fn try_from(r: CompositeRaw) -> Result<Self> {
        NargpComposite::new(r.interaction, r.output, r.bias)
    }
}

impl NargpComposite {
    pub fn new(interaction: Rbf, output: Rbf, bias: Rbf) -> Result<Self> {
        if interaction.dim != bias.dim {
            return Err(Error::DimensionMismatch {
                context: "composite bias kernel",
                expected: interaction.dim,
                got: bias.dim,
            });
        }
        if output.dim != 1 {
            return Err(Error::DimensionMismatch {
                context: "composite output kernel",
                expected: 1,
                got: output.dim,
            });
        }
        Ok(NargpComposite {
            interaction,
            output,
            bias,
        })
    }

    pub fn interaction(&self) -> &Rbf {
        &self.interaction
    }

    pub fn output(&self) -> &Rbf {
        &self.output
    }

    pub fn bias(&self) -> &Rbf {
        &self.bias
    }

    fn input_dim(&self) -> usize {
        self.interaction.dim
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelSpec {
    Rbf(Rbf),
    NargpComposite(NargpComposite),
}

impl From<Rbf> for KernelSpec {
    fn from(k: Rbf) -> Self {
        KernelSpec::Rbf(k)
    }
}

impl From<NargpComposite> for KernelSpec {
    fn from(k: NargpComposite) -> Self {
        KernelSpec::NargpComposite(k)
    }
}

impl KernelSpec {
    /// Dimension of the vectors the kernel accepts. For the composite kernel
    /// this includes the appended lower-fidelity coordinate.
    pub fn dim(&self) -> usize {
        match self {
            KernelSpec::Rbf(k) => k.dim,
            KernelSpec::NargpComposite(c) => c.input_dim() + 1,
        }
    }

    /// Prior variance k(x, x).
    pub fn prior_variance(&self) -> f64 {
        match self {
            KernelSpec::Rbf(k) => k.variance,
            KernelSpec::NargpComposite(c) => {
                c.interaction.variance * c.output.variance + c.bias.variance
            }
        }
    }

    #[inline]
    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            KernelSpec::Rbf(k) => k.eval(a, b),
            KernelSpec::NargpComposite(c) => {
                let d = c.input_dim();
                c.interaction.eval(&a[..d], &b[..d]) * c.output.eval(&a[d..], &b[d..])
                    + c.bias.eval(&a[..d], &b[..d])
            }
        }
    }

    pub fn n_params(&self) -> usize {
        match self {
            KernelSpec::Rbf(k) => k.n_params(true),
            KernelSpec::NargpComposite(c) => {
                c.interaction.n_params(true) + c.output.n_params(false) + c.bias.n_params(true)
            }
        }
    }

    pub fn log_params(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_params());
        match self {
            KernelSpec::Rbf(k) => k.push_log_params(&mut out, true),
            KernelSpec::NargpComposite(c) => {
                c.interaction.push_log_params(&mut out, true);
                c.output.push_log_params(&mut out, false);
                c.bias.push_log_params(&mut out, true);
            }
        }
        out
    }

    /// Returns a copy with hyperparameters replaced from a log-parameter vector.
    pub fn with_log_params(&self, p: &[f64]) -> Result<KernelSpec> {
        if p.len() != self.n_params() {
            return Err(Error::DimensionMismatch {
                context: "kernel parameters",
                expected: self.n_params(),
                got: p.len(),
            });
        }
        let mut out = self.clone();
        match &mut out {
            KernelSpec::Rbf(k) => k.set_log_params(p, true)?,
            KernelSpec::NargpComposite(c) => {
                let n1 = c.interaction.n_params(true);
                let n2 = c.output.n_params(false);
                c.interaction.set_log_params(&p[..n1], true)?;
                c.output.set_log_params(&p[n1..n1 + n2], false)?;
                c.bias.set_log_params(&p[n1 + n2..], true)?;
            }
        }
        Ok(out)
    }

    /// Evaluates k(a, b) and writes ∂k/∂(log params) into `grad`
    /// (length [`KernelSpec::n_params`]).
    pub fn eval_grad(&self, a: &[f64], b: &[f64], grad: &mut [f64]) -> f64 {
        match self {
            KernelSpec::Rbf(k) => k.eval_grad(a, b, grad, true),
            KernelSpec::NargpComposite(c) => {
                let d = c.input_dim();
                let n1 = c.interaction.n_params(true);
                let n2 = c.output.n_params(false);
                let (g_int, rest) = grad.split_at_mut(n1);
                let (g_out, g_bias) = rest.split_at_mut(n2);
                let kd = c.interaction.eval_grad(&a[..d], &b[..d], g_int, true);
                let kf = c.output.eval_grad(&a[d..], &b[d..], g_out, false);
                let kb = c.bias.eval_grad(&a[..d], &b[..d], g_bias, true);
                g_int.iter_mut().for_each(|g| *g *= kf);
                g_out.iter_mut().for_each(|g| *g *= kd);
                kd * kf + kb
            }
        }
    }

    /// Names of the log-parameters, in layout order.
    pub fn param_names(&self) -> Vec<String> {
        fn push(out: &mut Vec<String>, prefix: &str, k: &Rbf, with_variance: bool) {
            match &k.lengthscales {
                Lengthscales::Ard(v) => {
                    out.extend((0..v.len()).map(|d| format!("{prefix}log_lengthscale[{d}]")))
                }
                Lengthscales::Shared(_) => out.push(format!("{prefix}log_lengthscale")),
            }
            if with_variance {
                out.push(format!("{prefix}log_variance"));
            }
        }
        let mut out = Vec::new();
        match self {
            KernelSpec::Rbf(k) => push(&mut out, "", k, true),
            KernelSpec::NargpComposite(c) => {
                push(&mut out, "interaction.", &c.interaction, true);
                push(&mut out, "output.", &c.output, false);
                push(&mut out, "bias.", &c.bias, true);
            }
        }
        out
    }

    /// Shortest lengthscale anywhere in the spec; used for diagnostics.
    pub fn min_lengthscale(&self) -> f64 {
        let min_of = |k: &Rbf| (0..k.n_lengthscale_params()).map(|d| k.lengthscale(d)).fold(f64::INFINITY, f64::min);
        match self {
            KernelSpec::Rbf(k) => min_of(k),
            KernelSpec::NargpComposite(c) => min_of(&c.interaction).min(min_of(&c.output)).min(min_of(&c.bias)),
        }
    }
}

fn check_dim(spec: &KernelSpec, len: usize, context: &'static str) -> Result<()> {
    if len != spec.dim() {
        return Err(Error::DimensionMismatch {
            context,
            expected: spec.dim(),
            got: len,
        });
    }
    Ok(())
}

/// Checked kernel evaluation.
pub fn kernel_eval(spec: &KernelSpec, a: &[f64], b: &[f64]) -> Result<f64> {
    check_dim(spec, a.len(), "kernel argument")?;
    check_dim(spec, b.len(), "kernel argument")?;
    Ok(spec.eval(a, b))
}

/// Symmetric gram matrix `K_ij = k(x_i, x_j)`; only the lower triangle is
/// evaluated and mirrored, so the result is exactly symmetric.
pub fn gram_matrix(spec: &KernelSpec, x: &DenseMatrix) -> Result<DenseMatrix> {
    check_dim(spec, x.cols(), "gram matrix input")?;
    let n = x.rows();
    let mut k = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = spec.eval(x.row(i), x.row(j));
            k.set(i, j, v);
            k.set(j, i, v);
        }
    }
    Ok(k)
}

/// Cross-covariance `C_ij = k(a_i, b_j)`.
pub fn cross_covariance(spec: &KernelSpec, a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    check_dim(spec, a.cols(), "cross-covariance input")?;
    check_dim(spec, b.cols(), "cross-covariance input")?;
    let mut c = DenseMatrix::zeros(a.rows(), b.rows());
    for i in 0..a.rows() {
        for j in 0..b.rows() {
            c.set(i, j, spec.eval(a.row(i), b.row(j)));
        }
    }
    Ok(c)
}
