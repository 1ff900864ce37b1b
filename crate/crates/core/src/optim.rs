//! Quasi-Newton minimisation (BFGS with backtracking) plus a Newton polish on a
//! finite-difference Hessian.

use nalgebra::{DMatrix, DVector};

/// A function to minimise. `None` marks an infeasible or non-finite point.
pub trait Objective {
    fn value(&self, x: &[f64]) -> Option<f64>;
    fn gradient(&self, x: &[f64]) -> Option<Vec<f64>>;
}

#[derive(Debug, Clone, Copy)]
pub struct MinimizeOptions {
    pub max_iterations: usize,
    /// Max-norm of the gradient at convergence.
    pub gradient_tol: f64,
    /// Relative change in objective at convergence.
    pub value_tol: f64,
    /// Largest coordinate move in a single line search.
    pub max_step: f64,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self { max_iterations: 500, gradient_tol: 1e-6, value_tol: 1e-10, max_step: 5.0 }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn rel_change(old: f64, new: f64) -> f64 {
    (old - new).abs() / old.abs().max(new.abs()).max(1.0)
}

/// BFGS on the inverse Hessian with Armijo backtracking. Returns `None` if the
/// starting point is infeasible.
pub fn bfgs<O: Objective>(obj: &O, x0: &[f64], opts: &MinimizeOptions) -> Option<Minimum> {
    let n = x0.len();
    let mut x = DVector::from_column_slice(x0);
    let mut f = obj.value(x.as_slice())?;
    let mut g = DVector::from_vec(obj.gradient(x.as_slice())?);
    let mut h = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut last_change = f64::INFINITY;
    let mut iterations = 0;

    while iterations < opts.max_iterations {
        if max_abs(g.as_slice()) < opts.gradient_tol && last_change < opts.value_tol {
            break;
        }
        iterations += 1;
        let mut d = -(&h * &g);
        let mut slope = g.dot(&d);
        if slope.is_nan() || slope >= 0.0 {
            h = DMatrix::identity(n, n);
            fresh = true;
            d = -g.clone();
            slope = g.dot(&d);
            if slope.is_nan() || slope >= 0.0 {
                break;
            }
        }
        let dmax = max_abs(d.as_slice());
        let mut t = if dmax > opts.max_step { opts.max_step / dmax } else { 1.0 };
        let mut accepted = None;
        for _ in 0..60 {
            let trial = &x + t * &d;
            if let Some(ft) = obj.value(trial.as_slice()) {
                if ft <= f + 1e-4 * t * slope {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((x_new, f_new)) = accepted else {
            if fresh {
                break;
            }
            h = DMatrix::identity(n, n);
            fresh = true;
            continue;
        };
        let Some(g_new) = obj.gradient(x_new.as_slice()).map(DVector::from_vec) else {
            break;
        };
        let s = &x_new - &x;
        let yv = &g_new - &g;
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() && sy > 0.0 {
            if fresh {
                h *= sy / yv.dot(&yv);
            }
            let rho = 1.0 / sy;
            let hy = &h * &yv;
            let yhy = yv.dot(&hy);
            // H ← H - ρ(H y sᵀ + s yᵀ H) + (ρ² yᵀHy + ρ) s sᵀ
            h -= rho * (&hy * s.transpose() + &s * hy.transpose());
            h += (rho * rho * yhy + rho) * (&s * s.transpose());
            fresh = false;
        }
        last_change = rel_change(f, f_new);
        x = x_new;
        f = f_new;
        g = g_new;
    }

    let converged = max_abs(g.as_slice()) < opts.gradient_tol && last_change < opts.value_tol;
    Some(Minimum { x: x.as_slice().to_vec(), value: f, gradient: g.as_slice().to_vec(), iterations, converged })
}

/// Central-difference Hessian of `obj.value` with step `step · max(1, |x_j|)`.
pub fn numeric_hessian<O: Objective>(obj: &O, x: &[f64], step: f64) -> Option<DMatrix<f64>> {
    let n = x.len();
    let f0 = obj.value(x)?;
    let hs: Vec<f64> = x.iter().map(|v| step * v.abs().max(1.0)).collect();
    let mut p = x.to_vec();
    let eval = |p: &mut Vec<f64>, moves: &[(usize, f64)]| -> Option<f64> {
        for &(j, d) in moves {
            p[j] += d;
        }
        let v = obj.value(p);
        for &(j, d) in moves {
            p[j] -= d;
        }
        p.copy_from_slice(x);
        v
    };
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        let hi = hs[i];
        let up = eval(&mut p, &[(i, hi)])?;
        let down = eval(&mut p, &[(i, -hi)])?;
        hess[(i, i)] = (up - 2.0 * f0 + down) / (hi * hi);
        for j in 0..i {
            let hj = hs[j];
            let pp = eval(&mut p, &[(i, hi), (j, hj)])?;
            let pm = eval(&mut p, &[(i, hi), (j, -hj)])?;
            let mp = eval(&mut p, &[(i, -hi), (j, hj)])?;
            let mm = eval(&mut p, &[(i, -hi), (j, -hj)])?;
            let v = (pp - pm - mp + mm) / (4.0 * hi * hj);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    hess.iter().all(|v| v.is_finite()).then_some(hess)
}

/// A few Newton steps from `start`, each kept only if it lowers the objective.
pub fn newton_polish<O: Objective>(obj: &O, start: Minimum, opts: &MinimizeOptions, steps: usize) -> Minimum {
    let mut best = start;
    for _ in 0..steps {
        let Some(hess) = numeric_hessian(obj, &best.x, 1e-4) else { break };
        let Some(chol) = hess.cholesky() else { break };
        let g = DVector::from_column_slice(&best.gradient);
        let d = chol.solve(&(-g));
        if max_abs(d.as_slice()) > opts.max_step {
            break;
        }
        let trial: Vec<f64> = best.x.iter().zip(d.iter()).map(|(a, b)| a + b).collect();
        let (Some(f), Some(grad)) = (obj.value(&trial), obj.gradient(&trial)) else { break };
        if !(f < best.value || (f == best.value && max_abs(&grad) < max_abs(&best.gradient))) {
            break;
        }
        let change = rel_change(best.value, f);
        best = Minimum {
            converged: max_abs(&grad) < opts.gradient_tol && change < opts.value_tol || best.converged,
            x: trial,
            value: f,
            gradient: grad,
            iterations: best.iterations + 1,
        };
        if change < 1e-15 {
            break;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rosenbrock;

    impl Objective for Rosenbrock {
        fn value(&self, x: &[f64]) -> Option<f64> {
            Some((1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2))
        }
        fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
            let a = x[1] - x[0] * x[0];
            Some(vec![-2.0 * (1.0 - x[0]) - 400.0 * x[0] * a, 200.0 * a])
        }
    }

    struct Walled;

    impl Objective for Walled {
        // minimum of (x-3)² restricted to x < 2
        fn value(&self, x: &[f64]) -> Option<f64> {
            (x[0] < 2.0).then(|| (x[0] - 3.0).powi(2))
        }
        fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
            Some(vec![2.0 * (x[0] - 3.0)])
        }
    }

    #[test]
    fn rosenbrock() {
        let m = bfgs(&Rosenbrock, &[-1.2, 1.0], &MinimizeOptions::default()).unwrap();
        assert!(m.converged);
        assert!((m.x[0] - 1.0).abs() < 1e-5 && (m.x[1] - 1.0).abs() < 1e-5, "{:?}", m.x);
    }

    #[test]
    fn hessian_of_quadratic() {
        struct Q;
        impl Objective for Q {
            fn value(&self, x: &[f64]) -> Option<f64> {
                Some(2.0 * x[0] * x[0] + 3.0 * x[0] * x[1] + 0.5 * x[1] * x[1])
            }
            fn gradient(&self, x: &[f64]) -> Option<Vec<f64>> {
                Some(vec![4.0 * x[0] + 3.0 * x[1], 3.0 * x[0] + x[1]])
            }
        }
        let h = numeric_hessian(&Q, &[0.3, -2.0], 1e-4).unwrap();
        assert!((h[(0, 0)] - 4.0).abs() < 1e-6);
        assert!((h[(0, 1)] - 3.0).abs() < 1e-6);
        assert!((h[(1, 1)] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn infeasible_region_is_avoided() {
        let m = bfgs(&Walled, &[0.0], &MinimizeOptions::default()).unwrap();
        assert!(m.x[0] < 2.0 && m.x[0] > 1.99);
        assert!(!m.converged);
        assert!(bfgs(&Walled, &[2.5], &MinimizeOptions::default()).is_none());
    }
}
