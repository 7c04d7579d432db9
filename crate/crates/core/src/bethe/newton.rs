use nalgebra::{DMatrix, DVector};

use super::SolverConfig;

/// Maximum number of step halvings in the backtracking line search.
const MAX_HALVINGS: usize = 40;

/// A square nonlinear system `F(x) = 0`.
pub(crate) trait System {
    /// `None` when `x` lies outside the domain (singular configuration).
    fn residual(&self, x: &[f64]) -> Option<Vec<f64>>;
    fn jacobian(&self, x: &[f64]) -> DMatrix<f64>;
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Size of the full Newton step at `x` relative to `1 + ‖x‖∞`; `None` if
/// the Jacobian is singular there. Small only at an isolated root.
pub(crate) fn relative_step<S: System>(system: &S, x: &[f64]) -> Option<f64> {
    let f = system.residual(x)?;
    let rhs = DVector::from_iterator(x.len(), f.iter().map(|v| -v));
    let step = system.jacobian(x).lu().solve(&rhs)?;
    Some(norm_inf(step.as_slice()) / (1.0 + norm_inf(x)))
}

/// Newton's method with backtracking: the step is halved until the residual
/// 2-norm decreases and the iterate stays feasible. Returns the last iterate
/// together with its residual; acceptance is left to the caller.
pub(crate) fn damped_newton<S: System>(
    system: &S,
    x0: Vec<f64>,
    cfg: &SolverConfig,
) -> Option<NewtonOutcome> {
    let mut x = x0;
    let mut f = system.residual(&x)?;
    let dim = x.len();
    if dim == 0 {
        return Some(NewtonOutcome { x, residual: f });
    }
    let mut iterations = 0;
    while iterations < cfg.max_newton_iters {
        if norm_inf(&f) <= cfg.newton_tol {
            break;
        }
        iterations += 1;
        let jac = system.jacobian(&x);
        let rhs = DVector::from_iterator(dim, f.iter().map(|v| -v));
        let Some(step) = jac.lu().solve(&rhs) else {
            break;
        };
        if step.iter().any(|s| !s.is_finite()) {
            break;
        }
        let xnorm = norm_inf(&x);
        if norm_inf(step.as_slice()) <= 1e-16 * (1.0 + xnorm) {
            break;
        }
        let fnorm = norm2(&f);
        let mut lambda = cfg.damping;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial: Vec<f64> = x
                .iter()
                .zip(step.iter())
                .map(|(a, s)| a + lambda * s)
                .collect();
            if let Some(ft) = system.residual(&trial) {
                if ft.iter().all(|v| v.is_finite()) && norm2(&ft) < fnorm {
                    accepted = Some((trial, ft));
                    break;
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((xt, ft)) => {
                x = xt;
                f = ft;
            }
            None => break,
        }
    }
    Some(NewtonOutcome { x, residual: f })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Circle;

    impl System for Circle {
        fn residual(&self, x: &[f64]) -> Option<Vec<f64>> {
            Some(vec![x[0] * x[0] + x[1] * x[1] - 4.0, x[0] - x[1]])
        }
        fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
            DMatrix::from_row_slice(2, 2, &[2.0 * x[0], 2.0 * x[1], 1.0, -1.0])
        }
    }

    #[test]
    fn converges_on_circle_line_intersection() {
        let out = damped_newton(&Circle, vec![3.0, 0.5], &SolverConfig::default()).unwrap();
        let r = 2f64.sqrt();
        assert!((out.x[0] - r).abs() < 1e-13 && (out.x[1] - r).abs() < 1e-13);
        assert!(norm_inf(&out.residual) <= 1e-13);
    }
}
