//! Single-fidelity GP regression: marginal likelihood, its analytic gradient,
//! ML-II fitting with multi-restart L-BFGS, and posterior prediction.
//!
//! The prior mean is `μ + ρ·h(x)`, where `h` is an optional known covariate.
//! A plain GP has no covariate; the linear autoregressive model reuses this
//! machinery with `h` set to the lower-fidelity posterior mean.

mod optim;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    cholesky_with_policy, cross_covariance, gram_matrix, mean, variance, CholeskyFactor, DenseMatrix, JitterPolicy,
    KernelSpec, Lengthscales, NargpComposite, Rbf,
};
use crate::seed::{derive_seed, rng};

pub const DEFAULT_NOISE_FLOOR: f64 = 1e-8;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LENGTHSCALE_BOUNDS: (f64, f64) = (1e-3, 1e3);
const VARIANCE_BOUNDS: (f64, f64) = (1e-8, 1e6);
const NOISE_CEILING: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparameters {
    pub kernel: KernelSpec,
    /// Observation noise σ².
    pub noise_variance: f64,
    /// Constant prior mean μ.
    pub mean_constant: f64,
}

impl Hyperparameters {
    /// Noise below [`DEFAULT_NOISE_FLOOR`] is raised to the floor.
    pub fn new(kernel: impl Into<KernelSpec>, noise_variance: f64, mean_constant: f64) -> Result<Self> {
        Self::with_noise_floor(kernel, noise_variance, mean_constant, DEFAULT_NOISE_FLOOR)
    }

    pub fn with_noise_floor(
        kernel: impl Into<KernelSpec>,
        noise_variance: f64,
        mean_constant: f64,
        noise_floor: f64,
    ) -> Result<Self> {
        if !(noise_variance >= 0.0) || !noise_variance.is_finite() {
            return Err(Error::InvalidHyperparameter(format!(
                "noise variance must be finite and >= 0, got {noise_variance}"
            )));
        }
        if !mean_constant.is_finite() {
            return Err(Error::NonFinite("mean constant"));
        }
        Ok(Hyperparameters {
            kernel: kernel.into(),
            noise_variance: noise_variance.max(noise_floor),
            mean_constant,
        })
    }
}

/// Free or pinned scalar parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamMode {
    Free,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitConfig {
    /// Total optimizer starts: one canonical plus `restarts - 1` random.
    pub restarts: usize,
    pub seed: u64,
    pub noise_floor: f64,
    /// Estimate the constant mean μ jointly; otherwise μ = 0.
    pub estimate_mean: bool,
    /// Per-dimension lengthscales (ARD) instead of one shared lengthscale.
    pub ard: bool,
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub jitter: JitterPolicy,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            restarts: 10,
            seed: 0,
            noise_floor: DEFAULT_NOISE_FLOOR,
            estimate_mean: false,
            ard: true,
            max_iterations: 500,
            gradient_tolerance: 1e-6,
            jitter: JitterPolicy::default(),
        }
    }
}

/// Known covariate `h` scaled by ρ in the prior mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearMean {
    pub scale: f64,
    pub covariate: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub initial_mll: Option<f64>,
    pub final_mll: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub restarts: Vec<RestartRecord>,
    pub best_restart: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpModel {
    pub hyper: Hyperparameters,
    pub x_train: DenseMatrix,
    pub y_train: Vec<f64>,
    pub linear_mean: Option<LinearMean>,
    pub factor: CholeskyFactor,
    /// `(K + σ²I)⁻¹ (y - μ - ρh)`
    pub alpha: Vec<f64>,
    pub mll_at_fit: f64,
    pub fit_report: Option<FitReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDistribution {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl PredictiveDistribution {
    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    pub fn std_dev(&self) -> Vec<f64> {
        self.variance.iter().map(|v| v.sqrt()).collect()
    }
}

/// Clamps a numerically negative variance at zero.
pub(crate) fn clamp_variance(v: f64) -> f64 {
    if v < 0.0 {
        if v < -1e-10 {
            log::warn!("clamping negative predictive variance {v:e} to 0");
        }
        0.0
    } else {
        v
    }
}

fn check_data(x: &DenseMatrix, y: &[f64], kernel: &KernelSpec) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::DimensionMismatch {
            context: "training targets",
            expected: x.rows(),
            got: y.len(),
        });
    }
    if y.is_empty() {
        return Err(Error::EmptyInput("training data"));
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("training targets"));
    }
    if x.cols() != kernel.dim() {
        return Err(Error::DimensionMismatch {
            context: "training inputs vs kernel",
            expected: kernel.dim(),
            got: x.cols(),
        });
    }
    Ok(())
}

struct Factorized {
    factor: CholeskyFactor,
    alpha: Vec<f64>,
    mll: f64,
}

fn factorize(
    hyper: &Hyperparameters,
    x: &DenseMatrix,
    y: &[f64],
    linear: Option<(&[f64], f64)>,
    jitter: JitterPolicy,
) -> Result<Factorized> {
    let mut k = gram_matrix(&hyper.kernel, x)?;
    let n = y.len();
    for i in 0..n {
        k.set(i, i, k.get(i, i) + hyper.noise_variance);
    }
    let factor = cholesky_with_policy(&k, 0.0, jitter)?;
    let residual: Vec<f64> = match linear {
        Some((h, rho)) => y.iter().zip(h).map(|(yi, hi)| yi - hyper.mean_constant - rho * hi).collect(),
        None => y.iter().map(|yi| yi - hyper.mean_constant).collect(),
    };
    let alpha = factor.solve(&residual)?;
    let quad: f64 = residual.iter().zip(&alpha).map(|(r, a)| r * a).sum();
    let mll = -0.5 * (quad + factor.log_det() + n as f64 * LN_2PI);
    if !mll.is_finite() {
        return Err(Error::NonFinite("marginal likelihood"));
    }
    Ok(Factorized {
        factor,
        alpha,
        mll,
    })
}

/// Log marginal likelihood −½[rᵀ(K+σ²I)⁻¹r + log|K+σ²I| + n log 2π], r = y − μ.
pub fn mll(hyper: &Hyperparameters, x: &DenseMatrix, y: &[f64]) -> Result<f64> {
    check_data(x, y, &hyper.kernel)?;
    Ok(factorize(hyper, x, y, None, JitterPolicy::default())?.mll)
}

/// Gradient of [`mll`] with respect to
/// `(kernel log-params.., ln σ², μ)`.
pub fn mll_gradient(hyper: &Hyperparameters, x: &DenseMatrix, y: &[f64]) -> Result<Vec<f64>> {
    check_data(x, y, &hyper.kernel)?;
    let f = factorize(hyper, x, y, None, JitterPolicy::default())?;
    let mut g = kernel_and_noise_gradient(hyper, x, &f);
    g.push(f.alpha.iter().sum());
    Ok(g)
}

/// ½ tr((ααᵀ − K_y⁻¹) ∂K_y/∂θ) for the kernel log-params and ln σ².
fn kernel_and_noise_gradient(hyper: &Hyperparameters, x: &DenseMatrix, f: &Factorized) -> Vec<f64> {
    let n = x.rows();
    let p = hyper.kernel.n_params();
    let w = f.factor.inverse();
    let alpha = &f.alpha;
    let mut grad = vec![0.0; p + 1];
    let mut dk = vec![0.0; p];
    for i in 0..n {
        for j in 0..=i {
            hyper.kernel.eval_grad(x.row(i), x.row(j), &mut dk);
            let weight = alpha[i] * alpha[j] - w.get(i, j);
            let weight = if i == j { 0.5 * weight } else { weight };
            for (g, d) in grad.iter_mut().zip(&dk) {
                *g += weight * d;
            }
        }
    }
    let aa: f64 = alpha.iter().map(|a| a * a).sum();
    let tr: f64 = (0..n).map(|i| w.get(i, i)).sum();
    grad[p] = 0.5 * hyper.noise_variance * (aa - tr);
    grad
}

/// Full parameterisation of one fitting problem.
pub(crate) struct Problem<'a> {
    pub x: &'a DenseMatrix,
    pub y: &'a [f64],
    pub kernel: KernelSpec,
    pub mean: ParamMode,
    /// Covariate `h` and the mode of its scale ρ.
    pub covariate: Option<(&'a [f64], ParamMode)>,
    /// Box `|ρ| ≤ scale_limit` for a free ρ.
    pub scale_limit: f64,
}

struct Layout {
    n_kernel: usize,
    mean_free: bool,
    scale_free: bool,
}

impl Layout {
    fn len(&self) -> usize {
        self.n_kernel + 1 + usize::from(self.mean_free) + usize::from(self.scale_free)
    }
}

impl Problem<'_> {
    fn layout(&self) -> Layout {
        Layout {
            n_kernel: self.kernel.n_params(),
            mean_free: self.mean == ParamMode::Free,
            scale_free: matches!(self.covariate, Some((_, ParamMode::Free))),
        }
    }

    /// Decodes θ into hyperparameters and ρ.
    fn decode(&self, layout: &Layout, theta: &[f64], floor: f64) -> Result<(Hyperparameters, Option<f64>)> {
        let kernel = self.kernel.with_log_params(&theta[..layout.n_kernel])?;
        let noise = theta[layout.n_kernel].exp().max(floor);
        let mut next = layout.n_kernel + 1;
        let mu = match self.mean {
            ParamMode::Free => {
                next += 1;
                theta[next - 1]
            }
            ParamMode::Fixed(v) => v,
        };
        let rho = match self.covariate {
            Some((_, ParamMode::Free)) => Some(theta[next]),
            Some((_, ParamMode::Fixed(v))) => Some(v),
            None => None,
        };
        Ok((Hyperparameters::with_noise_floor(kernel, noise, mu, floor)?, rho))
    }

    fn linear(&self, rho: Option<f64>) -> Option<(&[f64], f64)> {
        self.covariate.map(|(h, _)| (h, rho.unwrap_or(0.0)))
    }

    /// Negative MLL and its gradient in θ-space.
    fn objective(&self, layout: &Layout, theta: &[f64], cfg: &FitConfig) -> Option<(f64, Vec<f64>)> {
        let (hyper, rho) = self.decode(layout, theta, cfg.noise_floor).ok()?;
        let f = factorize(&hyper, self.x, self.y, self.linear(rho), cfg.jitter).ok()?;
        let mut g = kernel_and_noise_gradient(&hyper, self.x, &f);
        if layout.mean_free {
            g.push(f.alpha.iter().sum());
        }
        if layout.scale_free {
            let (h, _) = self.covariate.expect("scale is free");
            g.push(h.iter().zip(&f.alpha).map(|(a, b)| a * b).sum());
        }
        Some((-f.mll, g.into_iter().map(|v| -v).collect()))
    }

    fn bounds(&self, layout: &Layout, cfg: &FitConfig) -> optim::Bounds {
        let mut lower = Vec::with_capacity(layout.len());
        let mut upper = Vec::with_capacity(layout.len());
        for name in self.kernel.param_names() {
            let (lo, hi) = if name.ends_with("log_variance") { VARIANCE_BOUNDS } else { LENGTHSCALE_BOUNDS };
            lower.push(lo.ln());
            upper.push(hi.ln());
        }
        lower.push(cfg.noise_floor.ln());
        upper.push(NOISE_CEILING.max(cfg.noise_floor).ln());
        if layout.mean_free {
            lower.push(f64::NEG_INFINITY);
            upper.push(f64::INFINITY);
        }
        if layout.scale_free {
            lower.push(-self.scale_limit);
            upper.push(self.scale_limit);
        }
        optim::Bounds { lower, upper }
    }

    /// Initial (ρ, μ) from a least-squares fit of y on h.
    fn initial_linear(&self) -> (Option<f64>, f64) {
        let rho = match self.covariate {
            None => None,
            Some((_, ParamMode::Fixed(v))) => Some(v),
            Some((h, ParamMode::Free)) => {
                let vh = variance(h);
                if vh > 0.0 && self.mean == ParamMode::Free {
                    let (mh, my) = (mean(h), mean(self.y));
                    let cov = h.iter().zip(self.y).map(|(a, b)| (a - mh) * (b - my)).sum::<f64>() / h.len() as f64;
                    Some(cov / vh)
                } else if self.mean != ParamMode::Free {
                    let hh: f64 = h.iter().map(|v| v * v).sum();
                    let mu = match self.mean {
                        ParamMode::Fixed(m) => m,
                        ParamMode::Free => 0.0,
                    };
                    if hh > 0.0 {
                        Some(h.iter().zip(self.y).map(|(a, b)| a * (b - mu)).sum::<f64>() / hh)
                    } else {
                        Some(1.0)
                    }
                } else {
                    Some(1.0)
                }
            }
            .map(|r| r.clamp(-self.scale_limit, self.scale_limit)),
        };
        let shifted: Vec<f64> = match (self.covariate, rho) {
            (Some((h, _)), Some(r)) => self.y.iter().zip(h).map(|(y, h)| y - r * h).collect(),
            _ => self.y.to_vec(),
        };
        let mu = match self.mean {
            ParamMode::Free => mean(&shifted),
            ParamMode::Fixed(v) => v,
        };
        (rho, mu)
    }

    fn push_linear(&self, layout: &Layout, theta: &mut Vec<f64>, rho: Option<f64>, mu: f64) {
        if layout.mean_free {
            theta.push(mu);
        }
        if layout.scale_free {
            theta.push(rho.unwrap_or(1.0));
        }
    }

    fn canonical_kernel(&self) -> Result<KernelSpec> {
        Ok(match &self.kernel {
            KernelSpec::Rbf(k) => canonical_rbf(k, 1.0)?.into(),
            KernelSpec::NargpComposite(c) => NargpComposite::new(
                canonical_rbf(c.interaction(), 1.0)?,
                canonical_rbf(c.output(), 1.0)?,
                canonical_rbf(c.bias(), 0.1)?,
            )?
            .into(),
        })
    }

    fn residual_variance(&self, rho: Option<f64>, mu: f64) -> f64 {
        let r: Vec<f64> = match (self.covariate, rho) {
            (Some((h, _)), Some(rho)) => self.y.iter().zip(h).map(|(y, h)| y - mu - rho * h).collect(),
            _ => self.y.iter().map(|y| y - mu).collect(),
        };
        variance(&r)
    }

    fn canonical_theta(&self, layout: &Layout) -> Result<Vec<f64>> {
        let (rho, mu) = self.initial_linear();
        let mut theta = self.canonical_kernel()?.log_params();
        theta.push((0.01 * self.residual_variance(rho, mu)).max(DEFAULT_NOISE_FLOOR).ln());
        self.push_linear(layout, &mut theta, rho, mu);
        Ok(theta)
    }

    fn random_theta(&self, layout: &Layout, seed: u64) -> Vec<f64> {
        let mut r = rng(seed);
        let (rho, mu) = self.initial_linear();
        let scale = self.residual_variance(rho, mu).max(1e-6);
        let mut theta = Vec::with_capacity(layout.len());
        for name in self.kernel.param_names() {
            let v = if name.ends_with("log_variance") {
                r.random_range((0.1f64).ln()..(10.0f64).ln()) + scale.ln()
            } else {
                r.random_range((0.05f64).ln()..(5.0f64).ln())
            };
            theta.push(v);
        }
        theta.push(r.random_range((1e-4f64).ln()..(0.1f64).ln()) + scale.ln());
        self.push_linear(layout, &mut theta, rho, mu);
        theta
    }

    fn condition(&self, theta: &[f64], layout: &Layout, cfg: &FitConfig, report: Option<FitReport>) -> Result<GpModel> {
        let (hyper, rho) = self.decode(layout, theta, cfg.noise_floor)?;
        let f = factorize(&hyper, self.x, self.y, self.linear(rho), cfg.jitter)?;
        Ok(GpModel {
            linear_mean: self.covariate.map(|(h, _)| LinearMean {
                scale: rho.unwrap_or(0.0),
                covariate: h.to_vec(),
            }),
            hyper,
            x_train: self.x.clone(),
            y_train: self.y.to_vec(),
            factor: f.factor,
            alpha: f.alpha,
            mll_at_fit: f.mll,
            fit_report: report,
        })
    }

    pub(crate) fn fit(&self, cfg: &FitConfig) -> Result<GpModel> {
        check_data(self.x, self.y, &self.kernel)?;
        if let Some((h, _)) = self.covariate {
            if h.len() != self.y.len() {
                return Err(Error::DimensionMismatch {
                    context: "mean covariate",
                    expected: self.y.len(),
                    got: h.len(),
                });
            }
        }
        warn_if_unnormalized(self.x);
        let layout = self.layout();
        let canonical = self.canonical_theta(&layout)?;
        if self.y.len() == 1 || cfg.restarts == 0 {
            let model = self.condition(&canonical, &layout, cfg, None)?;
            let record = RestartRecord {
                initial_mll: Some(model.mll_at_fit),
                final_mll: Some(model.mll_at_fit),
                iterations: 0,
                converged: false,
            };
            return Ok(GpModel {
                fit_report: Some(FitReport { restarts: vec![record], best_restart: 0 }),
                ..model
            });
        }

        let bounds = self.bounds(&layout, cfg);
        let opts = optim::Options {
            max_iterations: cfg.max_iterations,
            gradient_tolerance: cfg.gradient_tolerance,
            memory: 10,
        };
        let mut records = Vec::with_capacity(cfg.restarts);
        let mut best: Option<(f64, Vec<f64>, usize)> = None;
        for r in 0..cfg.restarts {
            let start = if r == 0 { canonical.clone() } else { self.random_theta(&layout, derive_seed(cfg.seed, r as u64)) };
            let mut clamped = start.clone();
            for ((v, lo), hi) in clamped.iter_mut().zip(&bounds.lower).zip(&bounds.upper) {
                *v = v.clamp(*lo, *hi);
            }
            let initial = self.objective(&layout, &clamped, cfg).map(|(f, _)| -f);
            let result = optim::minimize(|t| self.objective(&layout, t, cfg), &clamped, &bounds, opts);
            match result {
                Some(m) => {
                    let value = -m.value;
                    records.push(RestartRecord {
                        initial_mll: initial,
                        final_mll: Some(value),
                        iterations: m.iterations,
                        converged: m.converged,
                    });
                    if best.as_ref().is_none_or(|(b, _, _)| value > *b) {
                        best = Some((value, m.x, r));
                    }
                }
                None => records.push(RestartRecord {
                    initial_mll: initial,
                    final_mll: None,
                    iterations: 0,
                    converged: false,
                }),
            }
        }
        let Some((_, theta, best_restart)) = best else {
            return Err(Error::AllRestartsFailed { restarts: cfg.restarts });
        };
        self.condition(&theta, &layout, cfg, Some(FitReport { restarts: records, best_restart }))
    }
}

fn canonical_rbf(template: &Rbf, variance: f64) -> Result<Rbf> {
    let ls = match template.lengthscales() {
        Lengthscales::Ard(v) => Lengthscales::Ard(vec![0.5; v.len()]),
        Lengthscales::Shared(_) => Lengthscales::Shared(0.5),
    };
    Rbf::new(template.dim(), ls, variance)
}

fn warn_if_unnormalized(x: &DenseMatrix) {
    let tol = 1e-9;
    if x.entries().iter().any(|v| *v < -tol || *v > 1.0 + tol) {
        log::warn!("training inputs fall outside [0, 1]; features are expected to be min-max normalized");
    }
}

/// Default RBF template for `dim` inputs.
pub fn default_kernel(dim: usize, ard: bool) -> Result<KernelSpec> {
    Ok(if ard { Rbf::ard(vec![0.5; dim], 1.0)? } else { Rbf::shared(dim, 0.5, 1.0)? }.into())
}

/// ML-II fit of an RBF GP.
pub fn fit(x: &DenseMatrix, y: &[f64], config: &FitConfig) -> Result<GpModel> {
    fit_with_kernel(x, y, default_kernel(x.cols(), config.ard)?, config)
}

/// ML-II fit using `template` for the kernel structure (its values are ignored).
pub fn fit_with_kernel(x: &DenseMatrix, y: &[f64], template: KernelSpec, config: &FitConfig) -> Result<GpModel> {
    Problem {
        x,
        y,
        kernel: template,
        mean: if config.estimate_mean { ParamMode::Free } else { ParamMode::Fixed(0.0) },
        covariate: None,
        scale_limit: f64::INFINITY,
    }
    .fit(config)
}

impl GpModel {
    /// Conditions a GP on data with fixed hyperparameters.
    pub fn from_hyperparameters(hyper: Hyperparameters, x: &DenseMatrix, y: &[f64]) -> Result<GpModel> {
        Self::from_parts(hyper, x, y, None)
    }

    pub(crate) fn from_parts(
        hyper: Hyperparameters,
        x: &DenseMatrix,
        y: &[f64],
        linear_mean: Option<LinearMean>,
    ) -> Result<GpModel> {
        check_data(x, y, &hyper.kernel)?;
        let f = factorize(
            &hyper,
            x,
            y,
            linear_mean.as_ref().map(|l| (l.covariate.as_slice(), l.scale)),
            JitterPolicy::default(),
        )?;
        Ok(GpModel {
            hyper,
            x_train: x.clone(),
            y_train: y.to_vec(),
            linear_mean,
            factor: f.factor,
            alpha: f.alpha,
            mll_at_fit: f.mll,
            fit_report: None,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.x_train.cols()
    }

    /// Jitter added to `K + σ²I` when it was factorized.
    pub fn jitter_used(&self) -> f64 {
        self.factor.jitter()
    }

    /// Training residual `y − μ − ρh` that `alpha` solves against.
    pub fn training_residual(&self) -> Vec<f64> {
        match &self.linear_mean {
            Some(l) => self
                .y_train
                .iter()
                .zip(&l.covariate)
                .map(|(y, h)| y - self.hyper.mean_constant - l.scale * h)
                .collect(),
            None => self.y_train.iter().map(|y| y - self.hyper.mean_constant).collect(),
        }
    }
}

/// Latent predictive mean `μ + k*ᵀα` and variance `k(x*,x*) − k*ᵀ(K+σ²I)⁻¹k*`.
///
/// With a covariate in the prior mean, the `ρ·h(x*)` term is not included;
/// the multi-fidelity layer adds it.
pub fn predict(model: &GpModel, x_star: &DenseMatrix) -> Result<PredictiveDistribution> {
    predict_with(model, x_star, false)
}

/// As [`predict`]; `observation` adds σ² to the variance.
pub fn predict_with(model: &GpModel, x_star: &DenseMatrix, observation: bool) -> Result<PredictiveDistribution> {
    if x_star.cols() != model.input_dim() {
        return Err(Error::DimensionMismatch {
            context: "prediction inputs",
            expected: model.input_dim(),
            got: x_star.cols(),
        });
    }
    let kernel = &model.hyper.kernel;
    let ks = cross_covariance(kernel, x_star, &model.x_train)?;
    let mut mean = Vec::with_capacity(x_star.rows());
    let mut var = Vec::with_capacity(x_star.rows());
    for i in 0..x_star.rows() {
        let k = ks.row(i);
        mean.push(model.hyper.mean_constant + k.iter().zip(&model.alpha).map(|(a, b)| a * b).sum::<f64>());
        let v = model.factor.solve_lower(k)?;
        let prior = kernel.eval(x_star.row(i), x_star.row(i));
        let mut s = clamp_variance(prior - v.iter().map(|t| t * t).sum::<f64>());
        if observation {
            s += model.hyper.noise_variance;
        }
        var.push(s);
    }
    Ok(PredictiveDistribution { mean, variance: var })
}

#[cfg(test)]
mod tests;
