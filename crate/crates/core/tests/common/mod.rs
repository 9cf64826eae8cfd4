//! Independent reference implementations used as test oracles. Nothing here
//! calls into the library's factorization or prediction paths.
#![allow(dead_code)]

pub type Mat = Vec<Vec<f64>>;

/// Gauss–Jordan inverse with partial pivoting.
pub fn invert(a: &Mat) -> Mat {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            row
        })
        .collect();
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())
            .unwrap();
        m.swap(p, c);
        let piv = m[c][c];
        for v in m[c].iter_mut() {
            *v /= piv;
        }
        for r in 0..n {
            if r != c {
                let f = m[r][c];
                if f != 0.0 {
                    for k in 0..2 * n {
                        m[r][k] -= f * m[c][k];
                    }
                }
            }
        }
    }
    m.into_iter().map(|r| r[n..].to_vec()).collect()
}

/// Determinant by LU elimination with partial pivoting.
pub fn det(a: &Mat) -> f64 {
    let n = a.len();
    let mut m = a.clone();
    let mut d = 1.0;
    for c in 0..n {
        let p = (c..n)
            .max_by(|&i, &j| m[i][c].abs().partial_cmp(&m[j][c].abs()).unwrap())
            .unwrap();
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for k in c..n {
                m[r][k] -= f * m[c][k];
            }
        }
    }
    d
}

pub fn matvec(a: &Mat, v: &[f64]) -> Vec<f64> {
    a.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// s² exp(-Σ (a_d-b_d)² / (2 λ_d²)) written out directly.
pub fn rbf(a: &[f64], b: &[f64], ls: &[f64], var: f64) -> f64 {
    let mut s = 0.0;
    for d in 0..a.len() {
        let l = if ls.len() == 1 { ls[0] } else { ls[d] };
        s += (a[d] - b[d]) * (a[d] - b[d]) / (2.0 * l * l);
    }
    var * (-s).exp()
}

pub fn gram<K: Fn(&[f64], &[f64]) -> f64>(xs: &[Vec<f64>], k: &K) -> Mat {
    xs.iter().map(|a| xs.iter().map(|b| k(a, b)).collect()).collect()
}

/// Direct posterior mean/variance with an explicit inverse of K + σ²I.
pub fn naive_posterior<K: Fn(&[f64], &[f64]) -> f64>(
    xs: &[Vec<f64>],
    residual: &[f64],
    k: &K,
    noise: f64,
    x_star: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>) {
    let mut ky = gram(xs, k);
    for (i, row) in ky.iter_mut().enumerate() {
        row[i] += noise;
    }
    let inv = invert(&ky);
    let w = matvec(&inv, residual);
    let mut means = Vec::new();
    let mut vars = Vec::new();
    for s in x_star {
        let ks: Vec<f64> = xs.iter().map(|x| k(s, x)).collect();
        means.push(dot(&ks, &w));
        let v = k(s, s) - dot(&ks, &matvec(&inv, &ks));
        vars.push(v.max(0.0));
    }
    (means, vars)
}

/// −½[rᵀ K_y⁻¹ r + ln det K_y + n ln 2π] with a dense inverse and LU determinant.
pub fn naive_mll<K: Fn(&[f64], &[f64]) -> f64>(xs: &[Vec<f64>], residual: &[f64], k: &K, noise: f64) -> f64 {
    let mut ky = gram(xs, k);
    for (i, row) in ky.iter_mut().enumerate() {
        row[i] += noise;
    }
    let inv = invert(&ky);
    let quad = dot(residual, &matvec(&inv, residual));
    let n = residual.len() as f64;
    -0.5 * (quad + det(&ky).ln() + n * (2.0 * std::f64::consts::PI).ln())
}

/// Central finite difference of `f` at `x` along coordinate `j`.
pub fn central_diff<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], j: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    p[j] += h;
    let mut m = x.to_vec();
    m[j] -= h;
    (f(&p) - f(&m)) / (2.0 * h)
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Plug-in mutual information from a hand-built contingency table (nats).
pub fn mi_from_counts(a: &[usize], b: &[usize]) -> f64 {
    let n = a.len() as f64;
    let ka = a.iter().max().map_or(0, |m| m + 1);
    let kb = b.iter().max().map_or(0, |m| m + 1);
    let mut joint = vec![vec![0.0; kb]; ka];
    for (x, y) in a.iter().zip(b) {
        joint[*x][*y] += 1.0;
    }
    let pa: Vec<f64> = joint.iter().map(|r| r.iter().sum::<f64>() / n).collect();
    let pb: Vec<f64> = (0..kb).map(|j| joint.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let mut total = 0.0;
    for i in 0..ka {
        for j in 0..kb {
            let p = joint[i][j] / n;
            if p > 0.0 {
                total += p * (p / (pa[i] * pb[j])).ln();
            }
        }
    }
    total
}

/// Greedy MRMR re-evaluated from scratch at every step: the score of each
/// candidate recomputes every mutual information it needs.
pub fn brute_force_mrmr(columns: &[Vec<usize>], target: &[usize]) -> Vec<usize> {
    let n = columns.len();
    let mut selected: Vec<usize> = Vec::new();
    while selected.len() < n {
        let mut best: Option<(usize, f64)> = None;
        for f in 0..n {
            if selected.contains(&f) {
                continue;
            }
            let relevance = mi_from_counts(&columns[f], target);
            let score = if selected.is_empty() {
                relevance
            } else {
                let red: f64 = selected.iter().map(|s| mi_from_counts(&columns[f], &columns[*s])).sum();
                relevance - red / selected.len() as f64
            };
            if best.is_none_or(|(_, b)| score > b) {
                best = Some((f, score));
            }
        }
        selected.push(best.unwrap().0);
    }
    selected
}

/// Direct transcription of the recursive two-level linear autoregressive
/// predictor with dense inverses:
///   E_2 = ρ E_1(x*) + μ + k*ᵀ K⁻¹ (y_2 − ρ E_1(X_2) − μ)
///   V_2 = ρ² V_1(x*) + k(x*,x*) − k*ᵀ K⁻¹ k*
#[allow(clippy::too_many_arguments)]
pub fn naive_largp_two_level<K1, K2>(
    x1: &[Vec<f64>],
    y1: &[f64],
    k1: &K1,
    noise1: f64,
    mu1: f64,
    x2: &[Vec<f64>],
    y2: &[f64],
    k2: &K2,
    noise2: f64,
    rho: f64,
    mu2: f64,
    x_star: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>)
where
    K1: Fn(&[f64], &[f64]) -> f64,
    K2: Fn(&[f64], &[f64]) -> f64,
{
    let r1: Vec<f64> = y1.iter().map(|v| v - mu1).collect();
    let (m1_star, v1_star) = naive_posterior(x1, &r1, k1, noise1, x_star);
    let (m1_train, _) = naive_posterior(x1, &r1, k1, noise1, x2);
    let r2: Vec<f64> = y2
        .iter()
        .zip(&m1_train)
        .map(|(y, m)| y - rho * (m + mu1) - mu2)
        .collect();
    let (d_mean, d_var) = naive_posterior(x2, &r2, k2, noise2, x_star);
    let mean = m1_star
        .iter()
        .zip(&d_mean)
        .map(|(m, d)| rho * (m + mu1) + mu2 + d)
        .collect();
    let var = v1_star
        .iter()
        .zip(&d_var)
        .map(|(v, d)| rho * rho * v + d)
        .collect();
    (mean, var)
}
