//! Box-constrained limited-memory BFGS with a projected backtracking (Armijo)
//! line search. Minimizes; callers negate to maximize.

use std::collections::VecDeque;

#[derive(Debug, Clone)]
pub(crate) struct Bounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Bounds {
    fn clamp(&self, x: &mut [f64]) {
        for ((v, lo), hi) in x.iter_mut().zip(&self.lower).zip(&self.upper) {
            *v = v.clamp(*lo, *hi);
        }
    }

    /// Gradient with components that push against an active bound zeroed.
    fn projected_gradient(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(g)
            .enumerate()
            .map(|(i, (xi, gi))| {
                if (*xi <= self.lower[i] && *gi > 0.0) || (*xi >= self.upper[i] && *gi < 0.0) {
                    0.0
                } else {
                    *gi
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Options {
    pub max_iterations: usize,
    pub gradient_tolerance: f64,
    pub memory: usize,
}

#[derive(Debug, Clone)]
pub(crate) struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// `objective` returns `None` where it cannot be evaluated (e.g. a failed
/// factorization); such points are treated as infinitely bad. Returns `None`
/// only if the starting point itself cannot be evaluated.
pub(crate) fn minimize<F>(mut objective: F, x0: &[f64], bounds: &Bounds, opts: Options) -> Option<Minimum>
where
    F: FnMut(&[f64]) -> Option<(f64, Vec<f64>)>,
{
    let mut x = x0.to_vec();
    bounds.clamp(&mut x);
    let (mut f, mut g) = objective(&x)?;
    if !f.is_finite() {
        return None;
    }
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut flat_steps = 0;

    for iter in 0..opts.max_iterations {
        let pg = bounds.projected_gradient(&x, &g);
        if inf_norm(&pg) < opts.gradient_tolerance {
            return Some(Minimum { x, value: f, iterations: iter, converged: true });
        }

        // two-loop recursion
        let mut q = pg.clone();
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        if let Some((s, y, _)) = memory.back() {
            let gamma = dot(s, y) / dot(y, y);
            q.iter_mut().for_each(|v| *v *= gamma);
        }
        for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut d: Vec<f64> = q.iter().zip(&pg).map(|(v, p)| if *p == 0.0 { 0.0 } else { -v }).collect();
        if !(dot(&d, &pg) < 0.0) {
            memory.clear();
            d = pg.iter().map(|v| -v).collect();
        }

        let mut step = if memory.is_empty() { (1.0 / inf_norm(&d)).min(1.0) } else { 1.0 };
        let mut accepted = None;
        for _ in 0..50 {
            let mut xn: Vec<f64> = x.iter().zip(&d).map(|(xi, di)| xi + step * di).collect();
            bounds.clamp(&mut xn);
            let decrease: f64 = g.iter().zip(xn.iter().zip(&x)).map(|(gi, (a, b))| gi * (a - b)).sum();
            if let Some((fn_, gn)) = objective(&xn) {
                if fn_.is_finite() && fn_ <= f + 1e-4 * decrease {
                    accepted = Some((xn, fn_, gn));
                    break;
                }
            }
            step *= 0.5;
        }

        let Some((xn, fn_, gn)) = accepted else {
            if memory.is_empty() {
                return Some(Minimum { x, value: f, iterations: iter, converged: false });
            }
            memory.clear();
            continue;
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() && sy > 0.0 {
            if memory.len() == opts.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }

        if (f - fn_) <= 1e-14 * f.abs().max(1.0) {
            flat_steps += 1;
        } else {
            flat_steps = 0;
        }
        x = xn;
        f = fn_;
        g = gn;
        if flat_steps >= 5 {
            let pg = bounds.projected_gradient(&x, &g);
            return Some(Minimum { x, value: f, iterations: iter + 1, converged: inf_norm(&pg) < opts.gradient_tolerance * 100.0 });
        }
    }
    Some(Minimum { x, value: f, iterations: opts.max_iterations, converged: false })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> Options {
        Options { max_iterations: 500, gradient_tolerance: 1e-8, memory: 10 }
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| {
            let (a, b) = (x[0], x[1]);
            let v = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![-2.0 * (1.0 - a) - 400.0 * a * (b - a * a), 200.0 * (b - a * a)];
            Some((v, g))
        };
        let bounds = Bounds { lower: vec![-5.0; 2], upper: vec![5.0; 2] };
        let m = minimize(f, &[-1.2, 1.0], &bounds, opts()).unwrap();
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-6 && (m.x[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn active_bound() {
        // minimum of (x-3)² + (y+1)² on [0,2]x[0,2] is (2, 0)
        let f = |x: &[f64]| Some(((x[0] - 3.0).powi(2) + (x[1] + 1.0).powi(2), vec![2.0 * (x[0] - 3.0), 2.0 * (x[1] + 1.0)]));
        let bounds = Bounds { lower: vec![0.0; 2], upper: vec![2.0; 2] };
        let m = minimize(f, &[1.0, 1.0], &bounds, opts()).unwrap();
        assert!(m.converged);
        assert_eq!(m.x, vec![2.0, 0.0]);
    }

    #[test]
    fn failing_start_is_none() {
        let bounds = Bounds { lower: vec![-1.0], upper: vec![1.0] };
        assert!(minimize(|_| None, &[0.0], &bounds, opts()).is_none());
    }
}
