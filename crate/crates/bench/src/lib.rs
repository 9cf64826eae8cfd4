//! Shared inputs for the criterion benchmarks.

use mfgp_core::bench::{make_synthetic, SyntheticTask};
use mfgp_core::mfgp::FidelityLevel;
use mfgp_core::DenseMatrix;

/// `n × d` points on a deterministic low-discrepancy pattern in `[0, 1)^d`.
pub fn points(n: usize, d: usize) -> DenseMatrix {
    let step = [0.618_033_988_749_895, 0.754_877_666_246_693, 0.569_840_290_998_053, 0.855_276_958_040_353];
    let entries = (0..n * d).map(|k| ((k / d + 1) as f64 * step[k % d % step.len()] + (k % d) as f64 * 0.1).fract()).collect();
    DenseMatrix::from_row_major(n, d, entries).expect("finite points")
}

pub fn targets(x: &DenseMatrix) -> Vec<f64> {
    x.row_iter().map(|r| r.iter().enumerate().map(|(j, v)| ((j + 2) as f64 * v).sin()).sum()).collect()
}

/// Two-level linear-link instance with `n_high` of the `n_low` grid points at the top.
pub fn two_level(n_low: usize, n_high: usize) -> Vec<FidelityLevel> {
    make_synthetic(&SyntheticTask::linear_link(), n_low, n_high, 1).expect("synthetic task")
}
