//! Joint mode: one equation coefficient depends on an unknown scalar
//! parameter `p`, solved together with the roots from the augmented system
//!
//! ```text
//! BAE(t; p) = 0,    c₀(t; p) − target_c₀(p) = 0.
//! ```

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::newton::{damped_newton, norm_inf, relative_step, System};
use super::{
    chebyshev_starts, feasible_roots, oracle_warm_starts, same_point, BetheSolution, SolverConfig,
    ACCEPT_RESIDUAL,
};
use crate::basic_ode::BasicEquation;
use crate::oracle;
use crate::scalar::{Dual, Scalar};
use crate::{QesError, Result};

/// Number of grid samples used to bracket parameter values.
const BRACKET_SAMPLES: usize = 600;

/// Largest relative Newton step still counted as converged; rejects
/// iterates drifting along a root at infinity with a small residual.
const MAX_FINAL_STEP: f64 = 1e-8;

/// Coefficients of a one-parameter family of basic equations together
/// with the physically imposed `c₀`.
#[derive(Debug, Clone, Copy)]
pub struct FamilyCoefficients<T> {
    pub alpha: T,
    pub b2: T,
    pub b1: T,
    pub b0: T,
    pub c1: T,
    pub target_c0: T,
}

impl FamilyCoefficients<f64> {
    pub fn equation(&self) -> Result<BasicEquation> {
        BasicEquation::new(
            self.alpha,
            self.b2,
            self.b1,
            self.b0,
            self.c1,
            self.target_c0,
        )
    }
}

/// Sampling scale of a parameter range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RangeScale {
    Linear,
    /// Uniform in `ln(p − origin)`.
    Log {
        origin: f64,
    },
}

/// Where to look for the free parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamRange {
    pub lo: f64,
    pub hi: f64,
    pub scale: RangeScale,
}

impl ParamRange {
    pub fn linear(lo: f64, hi: f64) -> Self {
        ParamRange {
            lo,
            hi,
            scale: RangeScale::Linear,
        }
    }

    /// Log-uniform on `[lo, hi]`, `0 < lo < hi`.
    pub fn log(lo: f64, hi: f64) -> Self {
        Self::log_above(0.0, lo, hi)
    }

    /// Log-uniform in `p − origin` on `[lo, hi]`, `origin < lo < hi`.
    pub fn log_above(origin: f64, lo: f64, hi: f64) -> Self {
        ParamRange {
            lo,
            hi,
            scale: RangeScale::Log { origin },
        }
    }

    pub fn contains(&self, p: f64) -> bool {
        p >= self.lo && p <= self.hi
    }

    /// `k`-th of `count` evenly spaced samples (endpoints included).
    pub fn sample(&self, k: usize, count: usize) -> f64 {
        self.at(k as f64 / (count - 1) as f64)
    }

    fn at(&self, s: f64) -> f64 {
        match self.scale {
            RangeScale::Linear => self.lo + s * (self.hi - self.lo),
            RangeScale::Log { origin } => {
                let a = (self.lo - origin).ln();
                let b = (self.hi - origin).ln();
                (origin + (a + s * (b - a)).exp()).clamp(self.lo, self.hi)
            }
        }
    }
}

/// A scalar-parametrised family `p ↦ (α, b₂, b₁, b₀, c₁, target c₀)` with
/// `c₁(p) = −n·b₂(p)` for the degree it was built for.
pub trait QesFamily: Sync {
    fn coefficients<T: Scalar>(&self, p: T) -> FamilyCoefficients<T>;

    fn search_range(&self) -> ParamRange;

    /// Whether `p` lies in the family's domain (e.g. real square roots).
    fn admissible(&self, p: f64) -> bool {
        p.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointSolution {
    pub param: f64,
    pub solution: BetheSolution,
    /// `c₀(roots, p) − target_c₀(p)` at the solution.
    pub constraint_residual: f64,
}

struct JointSystem<'a, F> {
    family: &'a F,
    n: usize,
}

impl<F: QesFamily> JointSystem<'_, F> {
    fn eval(&self, x: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let (roots, p) = x.split_at(self.n);
        let p = p[0];
        if !self.family.admissible(p) {
            return None;
        }
        let co = self.family.coefficients(Dual::variable(p));
        let alpha = co.alpha.v;
        if !feasible_roots(alpha, roots) {
            return None;
        }
        let mut f = Vec::with_capacity(self.n + 1);
        let mut dfdp = Vec::with_capacity(self.n + 1);
        for (i, &ti) in roots.iter().enumerate() {
            let pair: f64 = roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &tj)| 2.0 / (ti - tj))
                .sum();
            let t = Dual::cst(ti);
            let drift = (co.b2 * t + co.b1) * t + co.b0;
            let ratio = drift / (t * (t - co.alpha));
            f.push(pair + ratio.v);
            dfdp.push(ratio.d);
        }
        let nf = self.n as f64;
        let sum: f64 = roots.iter().sum();
        let g = Dual::cst(nf * (nf - 1.0)) + co.b2 * Dual::cst(sum) + Dual::cst(nf) * co.b1
            - co.target_c0;
        f.push(g.v);
        dfdp.push(g.d);
        Some((f, dfdp))
    }
}

impl<F: QesFamily> System for JointSystem<'_, F> {
    fn residual(&self, x: &[f64]) -> Option<Vec<f64>> {
        let (f, _) = self.eval(x)?;
        f.iter().all(|v| v.is_finite()).then_some(f)
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        let mut jac = DMatrix::zeros(n + 1, n + 1);
        let Some((_, dfdp)) = self.eval(x) else {
            return jac;
        };
        let eq = self.family.coefficients(x[n]).equation();
        let Ok(eq) = eq else {
            return jac;
        };
        let bae = super::bae_jacobian(&eq, &x[..n]);
        for i in 0..n {
            for j in 0..n {
                jac[(i, j)] = bae[(i, j)];
            }
        }
        for j in 0..n {
            jac[(n, j)] = eq.b2;
        }
        for i in 0..=n {
            jac[(i, n)] = dfdp[i];
        }
        jac
    }
}

fn check_consistency<F: QesFamily>(family: &F, n: usize) -> Result<()> {
    let range = family.search_range();
    for k in 0..5 {
        let p = range.sample(k, 5);
        if !family.admissible(p) {
            continue;
        }
        let co = family.coefficients(p);
        let leak = co.c1 + n as f64 * co.b2;
        let scale = co.c1.abs().max((n as f64 * co.b2).abs()).max(1.0);
        if leak.abs() > 1e-12 * scale {
            return Err(QesError::InconsistentFamily(format!(
                "c1 + n*b2 = {leak:e} at p = {p} for n = {n}"
            )));
        }
    }
    Ok(())
}

/// Parameter values where `det(M(p) − target(p)·I)` changes sign, refined by
/// bisection. These are the parameters at which `target(p)` is an eigenvalue
/// of the invariant-subspace matrix.
fn bracket_parameters<F: QesFamily>(family: &F, n: usize) -> Vec<f64> {
    let range = family.search_range();
    let sign_at = |p: f64| -> Option<f64> {
        if !family.admissible(p) {
            return None;
        }
        let eq = family.coefficients(p).equation().ok()?;
        let s = oracle::characteristic_sign(&eq, n, eq.c0);
        (s != 0.0).then_some(s)
    };
    let samples: Vec<(f64, Option<f64>)> = (0..BRACKET_SAMPLES)
        .map(|k| {
            let p = range.sample(k, BRACKET_SAMPLES);
            (p, sign_at(p))
        })
        .collect();
    let mut out = Vec::new();
    for w in samples.windows(2) {
        let ((mut a, Some(sa)), (mut b, Some(sb))) = (w[0], w[1]) else {
            continue;
        };
        if sa == sb {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            match sign_at(m) {
                Some(sm) if sm == sa => a = m,
                Some(_) => b = m,
                None => break,
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Solve the augmented Bethe system for roots and parameter together.
///
/// Only parameter values inside the family's search range are reported.
pub fn solve_joint<F: QesFamily>(
    family: &F,
    n: usize,
    cfg: &SolverConfig,
) -> Result<Vec<JointSolution>> {
    cfg.validate()?;
    check_consistency(family, n)?;
    let range = family.search_range();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    let mut starts: Vec<Vec<f64>> = Vec::new();
    for p in bracket_parameters(family, n) {
        if let Ok(eq) = family.coefficients(p).equation() {
            for mut roots in oracle_warm_starts(&eq, n) {
                roots.push(p);
                starts.push(roots);
            }
        }
    }
    for _ in 0..cfg.num_starts {
        let p = range.at(rng.gen_range(0.0..1.0));
        if !family.admissible(p) {
            continue;
        }
        let Ok(eq) = family.coefficients(p).equation() else {
            continue;
        };
        for mut roots in chebyshev_starts(&eq, n, 1, &mut rng) {
            roots.push(p);
            starts.push(roots);
        }
    }

    let system = JointSystem { family, n };
    let converged: Vec<Option<Vec<f64>>> = starts
        .into_par_iter()
        .map(|x0| {
            let out = damped_newton(&system, x0, cfg)?;
            let settled = relative_step(&system, &out.x)? <= MAX_FINAL_STEP;
            (settled && norm_inf(&out.residual) <= ACCEPT_RESIDUAL).then_some(out.x)
        })
        .collect();

    let mut found: Vec<(Vec<f64>, JointSolution)> = Vec::new();
    for x in converged.into_iter().flatten() {
        let p = x[n];
        if !range.contains(p) || !family.admissible(p) {
            continue;
        }
        let co = family.coefficients(p);
        let eq = co.equation()?;
        let sol = BetheSolution::from_roots(&eq, x[..n].to_vec())?;
        if !sol.is_valid() {
            continue;
        }
        let constraint_residual = sol.c0 - co.target_c0;
        if constraint_residual.abs() > ACCEPT_RESIDUAL {
            continue;
        }
        let mut key = sol.roots.clone();
        key.push(p);
        if found.iter().any(|(k, _)| same_point(k, &key)) {
            continue;
        }
        found.push((
            key,
            JointSolution {
                param: p,
                solution: sol,
                constraint_residual,
            },
        ));
    }
    let mut out: Vec<JointSolution> = found.into_iter().map(|(_, s)| s).collect();
    out.sort_by(|a, b| a.param.total_cmp(&b.param));
    Ok(out)
}
