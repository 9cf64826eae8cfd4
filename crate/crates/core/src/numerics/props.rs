use nalgebra::DMatrix;
use proptest::prelude::*;

use super::*;

fn points(d: usize) -> impl Strategy<Value = DenseMatrix> {
    (2usize..10).prop_flat_map(move |n| {
        prop::collection::vec(0.0f64..1.0, n * d).prop_map(move |v| DenseMatrix::from_row_major(n, d, v).unwrap())
    })
}

fn kernel(d: usize) -> impl Strategy<Value = KernelSpec> {
    (prop::collection::vec(0.05f64..2.0, d), 0.1f64..3.0).prop_map(|(ls, v)| Rbf::ard(ls, v).unwrap().into())
}

fn problem() -> impl Strategy<Value = (KernelSpec, DenseMatrix)> {
    (1usize..4).prop_flat_map(|d| (kernel(d), points(d)))
}

proptest! {
    #[test]
    fn gram_is_symmetric_and_psd((k, x) in problem()) {
        let g = gram_matrix(&k, &x).unwrap();
        prop_assert_eq!(g.max_asymmetry(), 0.0);
        let n = g.rows();
        let eig = DMatrix::from_row_slice(n, n, g.entries()).symmetric_eigenvalues();
        let floor = -1e-10 * k.prior_variance() * n as f64;
        prop_assert!(eig.iter().all(|l| *l >= floor), "{:?}", eig);
    }

    #[test]
    fn cho_solve_round_trips((k, x) in problem(), noise in 1e-4f64..1.0, seed in 0u64..1000) {
        let n = x.rows();
        let mut a = gram_matrix(&k, &x).unwrap();
        a = DenseMatrix::from_row_major(
            n,
            n,
            (0..n * n).map(|e| a.entries()[e] + if e / n == e % n { noise } else { 0.0 }).collect(),
        )
        .unwrap();
        let b: Vec<f64> = (0..n).map(|i| ((seed + i as u64) as f64 * 0.37).sin()).collect();
        let l = cholesky(&a, 0.0).unwrap();
        let sol = cho_solve(&l, &b).unwrap();
        let back = a.matvec(&sol).unwrap();
        let scale = b.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        for (u, v) in back.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-8 * scale * (1.0 + k.prior_variance() / noise), "{} vs {}", u, v);
        }
        prop_assert!(l.reconstruct().frobenius_distance(&a) <= 1e-10 * (1.0 + k.prior_variance()) * n as f64);
    }

    #[test]
    fn kernel_is_symmetric_and_bounded((k, x) in problem()) {
        for a in x.row_iter() {
            for b in x.row_iter() {
                let v = k.eval(a, b);
                prop_assert_eq!(v, k.eval(b, a));
                prop_assert!(v > 0.0 && v <= k.prior_variance());
            }
        }
    }
}
