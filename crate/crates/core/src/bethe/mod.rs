//! Bethe ansatz equations for the roots of polynomial solutions.
//!
//! A monic degree-`n` solution `S(t) = ∏(t − tᵢ)` of the basic equation
//! exists only if `c₁ = −n·b₂`, `c₀ = n(n−1) + b₂Σtᵢ + n·b₁`, and the roots
//! satisfy, for every `i`,
//!
//! ```text
//! Σ_{j≠i} 2/(tᵢ − tⱼ) + (b₂tᵢ² + b₁tᵢ + b₀) / (tᵢ(tᵢ − α)) = 0.
//! ```

mod joint;
mod newton;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use joint::{
    solve_joint, FamilyCoefficients, JointSolution, ParamRange, QesFamily, RangeScale,
};
pub(crate) use newton::norm_inf;
use newton::{damped_newton, System};

use crate::basic_ode::BasicEquation;
use crate::oracle;
use crate::{QesError, Result};

/// Accepted solutions have a BAE residual 2-norm at most this.
pub const ACCEPT_RESIDUAL: f64 = 1e-10;
/// Minimum root separation, relative to `1 + max|tᵢ|`.
pub const MIN_SEPARATION: f64 = 1e-8;
/// Minimum distance of a root from the singular points `0` and `α`.
pub const SINGULAR_GUARD: f64 = 1e-10;
/// Sorted-root distance below which two solutions are the same, relative to `1 + ‖roots‖`.
pub const DEDUP_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub max_newton_iters: usize,
    pub newton_tol: f64,
    pub num_starts: usize,
    pub seed: u64,
    pub damping: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_newton_iters: 200,
            newton_tol: 1e-13,
            num_starts: 64,
            seed: 0x5eed,
            damping: 1.0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_newton_iters == 0 || self.num_starts == 0 {
            return Err(QesError::SolverConfig(
                "max_newton_iters and num_starts must be positive".into(),
            ));
        }
        if !(self.newton_tol > 0.0 && self.newton_tol < 1e-8) {
            return Err(QesError::SolverConfig(format!(
                "newton_tol must lie in (0, 1e-8), got {}",
                self.newton_tol
            )));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(QesError::SolverConfig(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetheSolution {
    pub n: usize,
    /// Ascending.
    pub roots: Vec<f64>,
    pub c0: f64,
    pub bae_residual_norm: f64,
    pub distinct_ok: bool,
}

impl BetheSolution {
    /// Assemble a solution from converged roots, computing `c₀` and the
    /// residual norm and checking the separation invariants.
    pub fn from_roots(eq: &BasicEquation, mut roots: Vec<f64>) -> Result<Self> {
        roots.sort_by(|a, b| a.total_cmp(b));
        let n = roots.len();
        let residual = bae_residual_vec(eq, &roots)?;
        let bae_residual_norm = residual.iter().fold(0.0, |s, r| s + r * r).sqrt();
        Ok(BetheSolution {
            n,
            c0: c0_from_roots(eq, n, &roots),
            bae_residual_norm,
            distinct_ok: roots_well_separated(eq, &roots),
            roots,
        })
    }

    /// All invariants: separation, distance from singular points, residual.
    pub fn is_valid(&self) -> bool {
        self.distinct_ok && self.bae_residual_norm <= ACCEPT_RESIDUAL
    }
}

fn roots_well_separated(eq: &BasicEquation, roots: &[f64]) -> bool {
    let scale = 1.0 + roots.iter().fold(0.0_f64, |m, r| m.max(r.abs()));
    let separated = roots
        .windows(2)
        .all(|w| (w[1] - w[0]).abs() > MIN_SEPARATION * scale);
    let off_singular = roots
        .iter()
        .all(|&r| r.abs() > SINGULAR_GUARD && (r - eq.alpha).abs() > SINGULAR_GUARD);
    separated && off_singular
}

/// Components `Σ_{j≠i} 2/(tᵢ−tⱼ) + (b₂tᵢ²+b₁tᵢ+b₀)/(tᵢ(tᵢ−α))`.
pub fn bae_residual_vec(eq: &BasicEquation, roots: &[f64]) -> Result<Vec<f64>> {
    for (i, &ti) in roots.iter().enumerate() {
        if ti == 0.0 || ti == eq.alpha {
            return Err(QesError::SingularConfiguration(format!(
                "root t{} = {ti} sits on a singular point",
                i + 1
            )));
        }
        if roots[..i].contains(&ti) {
            return Err(QesError::SingularConfiguration(format!(
                "coincident roots at {ti}"
            )));
        }
    }
    Ok(bae_components(eq, roots))
}

fn bae_components(eq: &BasicEquation, roots: &[f64]) -> Vec<f64> {
    roots
        .iter()
        .enumerate()
        .map(|(i, &ti)| {
            let pair: f64 = roots
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &tj)| 2.0 / (ti - tj))
                .sum();
            pair + eq.drift(ti) / (ti * (ti - eq.alpha))
        })
        .collect()
}

fn bae_jacobian(eq: &BasicEquation, roots: &[f64]) -> DMatrix<f64> {
    let n = roots.len();
    let mut jac = DMatrix::zeros(n, n);
    for i in 0..n {
        let ti = roots[i];
        let mut diag = 0.0;
        for j in 0..n {
            if j != i {
                let w = 2.0 / ((ti - roots[j]) * (ti - roots[j]));
                jac[(i, j)] = w;
                diag -= w;
            }
        }
        let q = ti * (ti - eq.alpha);
        let dq = 2.0 * ti - eq.alpha;
        let p = eq.drift(ti);
        let dp = 2.0 * eq.b2 * ti + eq.b1;
        jac[(i, i)] = diag + (dp * q - p * dq) / (q * q);
    }
    jac
}

/// `c₀ = n(n−1) + b₂Σtᵢ + n·b₁`.
pub fn c0_from_roots(eq: &BasicEquation, n: usize, roots: &[f64]) -> f64 {
    debug_assert_eq!(roots.len(), n);
    let nf = n as f64;
    nf * (nf - 1.0) + eq.b2 * roots.iter().sum::<f64>() + nf * eq.b1
}

/// Iterates must keep roots apart and away from `0` and `α`.
fn feasible_roots(alpha: f64, roots: &[f64]) -> bool {
    roots.iter().enumerate().all(|(i, &ti)| {
        ti.is_finite()
            && ti.abs() > SINGULAR_GUARD
            && (ti - alpha).abs() > SINGULAR_GUARD
            && roots[..i]
                .iter()
                .all(|&tj| (ti - tj).abs() > 1e-12 * (1.0 + ti.abs()))
    })
}

struct BaeSystem<'a> {
    eq: &'a BasicEquation,
}

impl System for BaeSystem<'_> {
    fn residual(&self, x: &[f64]) -> Option<Vec<f64>> {
        feasible_roots(self.eq.alpha, x).then(|| bae_components(self.eq, x))
    }

    fn jacobian(&self, x: &[f64]) -> DMatrix<f64> {
        bae_jacobian(self.eq, x)
    }
}

/// Chebyshev nodes on `[lo, hi]`.
pub(crate) fn chebyshev_nodes(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    (0..count)
        .map(|j| mid + half * (std::f64::consts::PI * (j as f64 + 0.5) / count as f64).cos())
        .collect()
}

/// Search interval for roots: `[min(0,α)−1, max(0,α)+n+b₁/|b₂|+1]`.
pub(crate) fn root_interval(eq: &BasicEquation, n: usize) -> (f64, f64) {
    let lo = eq.alpha.min(0.0) - 1.0;
    let mut hi = eq.alpha.max(0.0) + n as f64 + 1.0;
    if eq.b2 != 0.0 {
        hi += eq.b1 / eq.b2.abs();
    }
    if !(hi > lo + 1.0) {
        hi = lo + n as f64 + 2.0;
    }
    (lo, hi)
}

/// `count` random n-subsets of Chebyshev points, each a start for Newton.
pub(crate) fn chebyshev_starts(
    eq: &BasicEquation,
    n: usize,
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<Vec<f64>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let (lo, hi) = root_interval(eq, n);
    let nodes = chebyshev_nodes(lo, hi, 2 * n + 2);
    let jitter = 1e-3 * (hi - lo) / (2 * n + 2) as f64;
    (0..count)
        .map(|_| {
            let mut pool = nodes.clone();
            pool.shuffle(rng);
            pool.truncate(n);
            pool.iter_mut()
                .for_each(|x| *x += jitter * rng.gen_range(-1.0..1.0));
            pool.sort_by(|a, b| a.total_cmp(b));
            pool
        })
        .collect()
}

/// Real roots of the matrix-oracle eigenpolynomials, usable as warm starts.
pub(crate) fn oracle_warm_starts(eq: &BasicEquation, n: usize) -> Vec<Vec<f64>> {
    let Ok(levels) = oracle::oracle_solutions(eq, n) else {
        return Vec::new();
    };
    levels
        .iter()
        .filter_map(|lvl| lvl.real_roots(1e-6))
        .filter(|r| feasible_roots(eq.alpha, r))
        .collect()
}

pub(crate) fn same_point(a: &[f64], b: &[f64]) -> bool {
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let dist = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    dist < DEDUP_TOL * (1.0 + norm)
}

/// All distinct real-root solutions of the Bethe ansatz equations reachable
/// from the multi-start policy (Chebyshev subsets plus oracle warm starts).
///
/// An empty result means no start converged; it is not an error.
pub fn solve_bae(eq: &BasicEquation, n: usize, cfg: &SolverConfig) -> Result<Vec<BetheSolution>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut starts = oracle_warm_starts(eq, n);
    starts.extend(chebyshev_starts(eq, n, cfg.num_starts, &mut rng));
    solve_bae_from(eq, n, starts, cfg)
}

/// Newton from each given start; accepted solutions are deduplicated and
/// sorted, so the result does not depend on the order of `starts`.
pub fn solve_bae_from(
    eq: &BasicEquation,
    n: usize,
    starts: Vec<Vec<f64>>,
    cfg: &SolverConfig,
) -> Result<Vec<BetheSolution>> {
    cfg.validate()?;
    if !eq.is_qes_at(n) {
        return Err(QesError::NotQes {
            n,
            leakage: eq.leakage(n),
        });
    }
    if let Some(bad) = starts.iter().find(|s| s.len() != n) {
        return Err(QesError::SolverConfig(format!(
            "start of length {} for degree {n}",
            bad.len()
        )));
    }
    if n == 0 {
        return Ok(vec![BetheSolution::from_roots(eq, Vec::new())?]);
    }
    let system = BaeSystem { eq };
    let converged: Vec<Option<Vec<f64>>> = starts
        .into_par_iter()
        .map(|x0| {
            let out = damped_newton(&system, x0, cfg)?;
            (norm_inf(&out.residual) <= ACCEPT_RESIDUAL).then_some(out.x)
        })
        .collect();

    let mut found: Vec<BetheSolution> = Vec::new();
    for roots in converged.into_iter().flatten() {
        let sol = BetheSolution::from_roots(eq, roots)?;
        if !sol.is_valid() {
            continue;
        }
        if !found.iter().any(|s| same_point(&s.roots, &sol.roots)) {
            found.push(sol);
        }
    }
    found.sort_by(|a, b| {
        a.c0.total_cmp(&b.c0).then_with(|| {
            a.roots
                .iter()
                .zip(&b.roots)
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    });
    Ok(found)
}
