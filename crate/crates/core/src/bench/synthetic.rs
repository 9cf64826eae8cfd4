use rand::seq::index::sample;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::mfgp::FidelityLevel;
use crate::numerics::{cholesky, gram_matrix, DenseMatrix, KernelSpec};
use crate::seed::{derive_seed, rng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkType {
    Linear,
    Nonlinear,
}

/// Two-level test function pair on `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTask {
    pub name: String,
    pub link: LinkType,
    /// Observation noise standard deviation of the low and high level.
    pub noise_sd: [f64; 2],
}

fn forrester(x: f64) -> f64 {
    (6.0 * x - 2.0).powi(2) * (12.0 * x - 4.0).sin()
}

impl SyntheticTask {
    pub const NAMES: [&'static str; 2] = ["linear_link", "nonlinear_link"];

    /// `f_hi = (6x−2)² sin(12x−4)`, `f_lo = 0.5 f_hi + 10(x−0.5) − 5`.
    pub fn linear_link() -> Self {
        SyntheticTask { name: "linear_link".into(), link: LinkType::Linear, noise_sd: [0.0; 2] }
    }

    /// `f_lo = sin(8πx)`, `f_hi = (x − √2) f_lo²`.
    pub fn nonlinear_link() -> Self {
        SyntheticTask { name: "nonlinear_link".into(), link: LinkType::Nonlinear, noise_sd: [0.0; 2] }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.replace('-', "_").to_ascii_lowercase().as_str() {
            "linear_link" => Ok(Self::linear_link()),
            "nonlinear_link" => Ok(Self::nonlinear_link()),
            _ => Err(Error::UnknownTask(name.to_string())),
        }
    }

    pub fn with_noise(self, low: f64, high: f64) -> Self {
        SyntheticTask { noise_sd: [low, high], ..self }
    }

    pub fn low(&self, x: f64) -> f64 {
        match self.link {
            LinkType::Linear => 0.5 * forrester(x) + 10.0 * (x - 0.5) - 5.0,
            LinkType::Nonlinear => (8.0 * std::f64::consts::PI * x).sin(),
        }
    }

    pub fn high(&self, x: f64) -> f64 {
        match self.link {
            LinkType::Linear => forrester(x),
            LinkType::Nonlinear => (x - std::f64::consts::SQRT_2) * self.low(x).powi(2),
        }
    }

    /// Value at level 1 (low) or 2 (high).
    pub fn eval(&self, level: usize, x: f64) -> f64 {
        if level <= 1 {
            self.low(x)
        } else {
            self.high(x)
        }
    }

    /// Noisy observations at `xs`; the noise stream is seeded by `seed`.
    pub fn observe(&self, level: usize, xs: &[f64], seed: u64) -> Vec<f64> {
        let sd = self.noise_sd[level.clamp(1, 2) - 1];
        let mut r = rng(seed);
        xs.iter()
            .map(|x| {
                let v = self.eval(level, *x);
                if sd > 0.0 {
                    let z: f64 = StandardNormal.sample(&mut r);
                    v + sd * z
                } else {
                    v
                }
            })
            .collect()
    }
}

/// `n` evenly spaced points on `[0, 1]`.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n).map(|i| i as f64 / (n - 1) as f64).collect(),
    }
}

/// Low level on an `n_low`-point grid; high level on a seeded `n_high`-point
/// subset of that grid, so the levels are nested by construction.
pub fn make_synthetic(task: &SyntheticTask, n_low: usize, n_high: usize, seed: u64) -> Result<Vec<FidelityLevel>> {
    if n_low < 2 || n_high == 0 || n_high > n_low {
        return Err(Error::Config(format!("need 2 <= n_low and 1 <= n_high <= n_low, got {n_low} and {n_high}")));
    }
    let low_x = uniform_grid(n_low);
    let mut pick = sample(&mut rng(derive_seed(seed, 0)), n_low, n_high).into_vec();
    pick.sort_unstable();
    let high_x: Vec<f64> = pick.iter().map(|i| low_x[*i]).collect();
    Ok(vec![
        FidelityLevel::new(1, DenseMatrix::column(&low_x)?, task.observe(1, &low_x, derive_seed(seed, 1)))?,
        FidelityLevel::new(2, DenseMatrix::column(&high_x)?, task.observe(2, &high_x, derive_seed(seed, 2)))?,
    ])
}

/// Draws one function from a zero-mean GP prior at the rows of `x` and adds
/// Gaussian noise of variance `noise_variance`.
pub fn sample_gp_prior(kernel: &KernelSpec, x: &DenseMatrix, noise_variance: f64, seed: u64) -> Result<Vec<f64>> {
    let factor = cholesky(&gram_matrix(kernel, x)?, 1e-10)?;
    let mut r = rng(seed);
    let z: Vec<f64> = (0..x.rows()).map(|_| StandardNormal.sample(&mut r)).collect();
    let f = factor.lower().matvec(&z)?;
    let sd = noise_variance.max(0.0).sqrt();
    Ok(f.into_iter()
        .map(|v| {
            let e: f64 = StandardNormal.sample(&mut r);
            v + sd * e
        })
        .collect())
}

/// Single-level dataset of `n` uniform random inputs in `[0,1]^dim` with
/// targets drawn from a GP prior plus noise.
pub fn gp_prior_dataset(n: usize, kernel: &KernelSpec, noise_variance: f64, seed: u64) -> Result<Dataset> {
    use rand::Rng;
    let dim = kernel.dim();
    let mut r = rng(derive_seed(seed, 0));
    let x = DenseMatrix::from_row_major(n, dim, (0..n * dim).map(|_| r.random::<f64>()).collect())?;
    let y = sample_gp_prior(kernel, &x, noise_variance, derive_seed(seed, 1))?;
    Dataset::new(crate::data::default_feature_names(dim), x, y, vec![1; n], vec!["1".into()])
}
