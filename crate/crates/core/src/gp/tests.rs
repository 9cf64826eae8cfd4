use super::*;
use crate::numerics::Rbf;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::oracle;

fn rows(x: &DenseMatrix) -> Vec<Vec<f64>> {
    x.row_iter().map(|r| r.to_vec()).collect()
}

fn random_problem(seed: u64, n: usize, d: usize) -> (DenseMatrix, Vec<f64>, Vec<f64>, f64, f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = DenseMatrix::from_row_major(n, d, (0..n * d).map(|_| rng.random::<f64>()).collect()).unwrap();
    let y: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let ls: Vec<f64> = (0..d).map(|_| rng.random_range(0.2..1.5)).collect();
    (x, y, ls, rng.random_range(0.5..2.0), rng.random_range(0.01..0.2), rng.random_range(-0.5..0.5))
}

#[test]
fn mll_single_point_closed_form() {
    let hyper = Hyperparameters::new(Rbf::ard(vec![0.7], 1.0).unwrap(), 0.0, 0.3).unwrap();
    let x = DenseMatrix::column(&[0.42]).unwrap();
    let v = mll(&hyper, &x, &[0.3]).unwrap();
    let want = -0.5 * (2.0 * std::f64::consts::PI).ln() - 0.5 * (1.0 + DEFAULT_NOISE_FLOOR).ln();
    assert!((v - want).abs() < 1e-15);
    assert!((v + 0.9189385).abs() < 1e-7);
}

#[test]
fn mll_matches_naive_inversion() {
    let (x, y, ls, s2, noise, mu) = random_problem(4, 3, 2);
    let hyper = Hyperparameters::new(Rbf::ard(ls.clone(), s2).unwrap(), noise, mu).unwrap();
    let r: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let want = oracle::naive_mll(&rows(&x), &r, &|a, b| oracle::rbf(a, b, &ls, s2), noise);
    assert!((mll(&hyper, &x, &y).unwrap() - want).abs() < 1e-10);
}

#[test]
fn mll_quadratic_term_scales_by_four() {
    let (x, y, ls, s2, noise, mu) = random_problem(8, 5, 1);
    let hyper = Hyperparameters::new(Rbf::ard(ls, s2).unwrap(), noise, mu).unwrap();
    let y2: Vec<f64> = y.iter().map(|v| mu + 2.0 * (v - mu)).collect();
    let base = mll(&hyper, &x, &y).unwrap();
    let scaled = mll(&hyper, &x, &y2).unwrap();
    // the data term is -½ q; complexity terms are unchanged, so the difference is -3/2 q
    let zero: Vec<f64> = vec![mu; y.len()];
    let constant = mll(&hyper, &x, &zero).unwrap();
    let q = -2.0 * (base - constant);
    let q2 = -2.0 * (scaled - constant);
    assert!((q2 - 4.0 * q).abs() < 1e-10 * q.abs().max(1.0));
}

fn fd_gradient(hyper: &Hyperparameters, x: &DenseMatrix, y: &[f64]) -> Vec<f64> {
    let mut theta = hyper.kernel.log_params();
    theta.push(hyper.noise_variance.ln());
    theta.push(hyper.mean_constant);
    let k = hyper.kernel.n_params();
    let f = |t: &[f64]| {
        let h = Hyperparameters::with_noise_floor(hyper.kernel.with_log_params(&t[..k]).unwrap(), t[k].exp(), t[k + 1], 0.0)
            .unwrap();
        mll(&h, x, y).unwrap()
    };
    (0..theta.len()).map(|j| oracle::central_diff(&f, &theta, j, 1e-5)).collect()
}

#[test]
fn gradient_matches_finite_differences() {
    let (x, y, ls, s2, noise, mu) = random_problem(12, 6, 3);
    let hyper = Hyperparameters::new(Rbf::ard(ls, s2).unwrap(), noise, mu).unwrap();
    let g = mll_gradient(&hyper, &x, &y).unwrap();
    let fd = fd_gradient(&hyper, &x, &y);
    for (a, b) in g.iter().zip(&fd) {
        assert!((a - b).abs() <= 1e-4 * b.abs().max(1e-3), "{a} vs {b}");
    }
}

#[test]
fn mean_gradient_vanishes_at_sample_mean_for_isotropic_kernel() {
    let x = DenseMatrix::column(&[0.0, 0.3, 0.6, 0.9]).unwrap();
    let y = [0.2, 1.5, -0.4, 0.9];
    let ybar = y.iter().sum::<f64>() / 4.0;
    let hyper = Hyperparameters::new(Rbf::ard(vec![1e-3], 2.0).unwrap(), 0.1, ybar).unwrap();
    let g = mll_gradient(&hyper, &x, &y).unwrap();
    assert!(g.last().unwrap().abs() < 1e-12);
}

#[test]
fn fit_paper_scale_shape() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let x = DenseMatrix::from_row_major(16, 8, (0..128).map(|_| rng.random::<f64>()).collect()).unwrap();
    let y: Vec<f64> = x.row_iter().map(|r| (r[0] * 3.0).sin() + r[1] * r[2] + 0.05 * rng.random::<f64>()).collect();
    let model = fit(&x, &y, &FitConfig { seed: 3, ..FitConfig::default() }).unwrap();
    let report = model.fit_report.as_ref().unwrap();
    assert_eq!(report.restarts.len(), 10);
    for r in &report.restarts {
        if let Some(init) = r.initial_mll {
            assert!(model.mll_at_fit >= init - 1e-9);
        }
    }
}

#[test]
fn constant_target_predicts_constant() {
    let x = DenseMatrix::column(&[0.0, 0.2, 0.5, 0.7, 1.0]).unwrap();
    let y = [0.37; 5];
    let cfg = FitConfig { estimate_mean: true, ..FitConfig::default() };
    let model = fit(&x, &y, &cfg).unwrap();
    let grid = DenseMatrix::column(&[-3.0, 0.1, 0.33, 0.9, 5.0]).unwrap();
    for m in predict(&model, &grid).unwrap().mean {
        assert!((m - 0.37).abs() < 1e-6, "{m}");
    }
}

#[test]
fn noise_free_sine_interpolates() {
    let xs: Vec<f64> = (0..10).map(|i| i as f64 / 9.0).collect();
    let y: Vec<f64> = xs.iter().map(|x| (2.0 * std::f64::consts::PI * x).sin()).collect();
    let x = DenseMatrix::column(&xs).unwrap();
    let model = fit(&x, &y, &FitConfig::default()).unwrap();
    let p = predict(&model, &x).unwrap();
    assert!(oracle::max_abs_diff(&p.mean, &y) < 1e-4);
}

#[test]
fn stationary_point_has_small_gradient() {
    let xs: Vec<f64> = (0..12).map(|i| i as f64 / 11.0).collect();
    let y: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| (4.0 * x).sin() + 0.3 * x + 0.05 * ((i * 7919) % 13) as f64 / 13.0)
        .collect();
    let x = DenseMatrix::column(&xs).unwrap();
    let model = fit(&x, &y, &FitConfig { estimate_mean: true, ..FitConfig::default() }).unwrap();
    let g = mll_gradient(&model.hyper, &x, &y).unwrap();
    assert!(model.hyper.noise_variance > 2.0 * DEFAULT_NOISE_FLOOR, "noise at its bound; pick another instance");
    let norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    assert!(norm < 1e-4, "gradient norm {norm}: {g:?}");
}

#[test]
fn training_points_reproduced_at_noise_floor() {
    let (x, y, ls, s2, _, mu) = random_problem(5, 6, 2);
    let hyper = Hyperparameters::new(Rbf::ard(ls, s2).unwrap(), 0.0, mu).unwrap();
    let model = GpModel::from_hyperparameters(hyper, &x, &y).unwrap();
    let p = predict(&model, &x).unwrap();
    assert!(oracle::max_abs_diff(&p.mean, &y) < 1e-6);
}

#[test]
fn far_points_revert_to_prior() {
    let hyper = Hyperparameters::new(Rbf::ard(vec![0.1], 1.7).unwrap(), 0.01, 0.25).unwrap();
    let x = DenseMatrix::column(&[0.0, 0.5, 1.0]).unwrap();
    let model = GpModel::from_hyperparameters(hyper, &x, &[1.0, -1.0, 2.0]).unwrap();
    let p = predict(&model, &DenseMatrix::column(&[50.0]).unwrap()).unwrap();
    assert!((p.mean[0] - 0.25).abs() < 1e-6);
    assert!((p.variance[0] - 1.7).abs() < 1e-6);
}

#[test]
fn prediction_matches_naive_oracle() {
    let xs = [0.05, 0.3, 0.42, 0.7, 0.95];
    let y = [0.3, -0.2, 0.1, 0.8, 0.4];
    let (ls, s2, noise, mu) = (0.25, 1.3, 0.02, 0.1);
    let hyper = Hyperparameters::new(Rbf::ard(vec![ls], s2).unwrap(), noise, mu).unwrap();
    let x = DenseMatrix::column(&xs).unwrap();
    let model = GpModel::from_hyperparameters(hyper, &x, &y).unwrap();
    let star: Vec<f64> = (0..21).map(|i| -0.1 + 0.06 * i as f64).collect();
    let p = predict(&model, &DenseMatrix::column(&star).unwrap()).unwrap();
    let xr: Vec<Vec<f64>> = xs.iter().map(|v| vec![*v]).collect();
    let sr: Vec<Vec<f64>> = star.iter().map(|v| vec![*v]).collect();
    let r: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let (m, v) = oracle::naive_posterior(&xr, &r, &|a, b| oracle::rbf(a, b, &[ls], s2), noise, &sr);
    let m: Vec<f64> = m.iter().map(|v| v + mu).collect();
    assert!(oracle::max_abs_diff(&p.mean, &m) < 1e-8);
    assert!(oracle::max_abs_diff(&p.variance, &v) < 1e-8);
}

#[test]
fn observation_variance_adds_noise() {
    let hyper = Hyperparameters::new(Rbf::ard(vec![0.3], 1.0).unwrap(), 0.05, 0.0).unwrap();
    let x = DenseMatrix::column(&[0.1, 0.6]).unwrap();
    let model = GpModel::from_hyperparameters(hyper, &x, &[0.0, 1.0]).unwrap();
    let q = DenseMatrix::column(&[0.3]).unwrap();
    let latent = predict(&model, &q).unwrap();
    let obs = predict_with(&model, &q, true).unwrap();
    assert!((obs.variance[0] - latent.variance[0] - 0.05).abs() < 1e-15);
}

#[test]
fn posterior_variance_bounded_by_prior() {
    let (x, y, ls, s2, noise, mu) = random_problem(77, 8, 2);
    let hyper = Hyperparameters::new(Rbf::ard(ls, s2).unwrap(), noise, mu).unwrap();
    let model = GpModel::from_hyperparameters(hyper, &x, &y).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let q = DenseMatrix::from_row_major(50, 2, (0..100).map(|_| rng.random_range(-0.5..1.5)).collect()).unwrap();
    for v in predict(&model, &q).unwrap().variance {
        assert!(v >= 0.0 && v <= s2 + 1e-10);
    }
}

#[test]
fn duplicate_point_never_increases_variance() {
    for seed in 0..10 {
        let (x, y, ls, s2, noise, mu) = random_problem(100 + seed, 6, 2);
        let hyper = Hyperparameters::new(Rbf::ard(ls, s2).unwrap(), noise, mu).unwrap();
        let base = GpModel::from_hyperparameters(hyper.clone(), &x, &y).unwrap();
        let dup_row = DenseMatrix::from_rows(&[x.row(2)]).unwrap();
        let x2 = x.vstack(&dup_row).unwrap();
        let mut y2 = y.clone();
        y2.push(y[2]);
        let more = GpModel::from_hyperparameters(hyper, &x2, &y2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = DenseMatrix::from_row_major(20, 2, (0..40).map(|_| rng.random::<f64>()).collect()).unwrap();
        let a = predict(&base, &q).unwrap().variance;
        let b = predict(&more, &q).unwrap().variance;
        for (va, vb) in a.iter().zip(&b) {
            assert!(*vb <= *va + 1e-12);
        }
    }
}

#[test]
fn fit_is_bit_reproducible() {
    let (x, y, ..) = random_problem(31, 9, 2);
    let cfg = FitConfig { seed: 17, ..FitConfig::default() };
    let a = fit(&x, &y, &cfg).unwrap();
    let b = fit(&x, &y, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn single_point_uses_canonical_hypers() {
    let x = DenseMatrix::column(&[0.5]).unwrap();
    let model = fit(&x, &[2.0], &FitConfig::default()).unwrap();
    assert_eq!(model.hyper.kernel.log_params(), vec![0.5f64.ln(), 0.0]);
}

#[test]
fn predict_rejects_wrong_dimension() {
    let x = DenseMatrix::column(&[0.1, 0.9]).unwrap();
    let model = fit(&x, &[0.0, 1.0], &FitConfig { restarts: 2, ..FitConfig::default() }).unwrap();
    assert!(predict(&model, &DenseMatrix::zeros(2, 2)).is_err());
}

#[test]
fn fit_rejects_mismatched_targets() {
    let x = DenseMatrix::column(&[0.1, 0.9]).unwrap();
    assert!(fit(&x, &[0.0], &FitConfig::default()).is_err());
}

#[test]
fn free_scale_stays_inside_its_box() {
    let xs: Vec<f64> = (0..8).map(|i| i as f64 / 7.0).collect();
    let x = DenseMatrix::column(&xs).unwrap();
    let h: Vec<f64> = xs.iter().map(|v| 0.5 + 1e-10 * v).collect();
    let y: Vec<f64> = xs.iter().map(|v| 2.0 * v).collect();
    let gp = Problem {
        x: &x,
        y: &y,
        kernel: default_kernel(1, true).unwrap(),
        mean: ParamMode::Free,
        covariate: Some((&h, ParamMode::Free)),
        scale_limit: 10.0,
    }
    .fit(&FitConfig { restarts: 3, estimate_mean: true, ..FitConfig::default() })
    .unwrap();
    let rho = gp.linear_mean.unwrap().scale;
    assert!(rho.abs() <= 10.0, "{rho}");
}
