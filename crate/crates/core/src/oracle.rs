//! Matrix oracle: the operator `H = t(t−α)d²/dt² + (b₂t²+b₁t+b₀)d/dt + c₁t`
//! restricted to the invariant space of polynomials of degree ≤ n.
//!
//! Diagonalising the tridiagonal matrix of `H` in the monomial basis
//! enumerates every polynomial solution, including those with complex roots
//! or complex `c₀`, without any nonlinear iteration.

use nalgebra::linalg::balancing::balance_parlett_reinsch;
use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::basic_ode::{BasicEquation, Polynomial};
use crate::{QesError, Result};

/// Tolerance on `|c₁ + n·b₂| / max(1, |n·b₂|)` for invariance.
pub const INVARIANCE_TOL: f64 = 1e-9;
/// Relative imaginary part below which a root counts as real.
pub const REAL_ROOT_TOL: f64 = 1e-9;
/// Relative size of the leading eigenvector coordinate below which the level is degenerate.
const DEGENERATE_TOL: f64 = 1e-12;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITERS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct InvariantMatrix {
    pub n: usize,
    /// Column `k` holds the coordinates of `H·tᵏ`.
    pub entries: DMatrix<f64>,
}

/// One eigenpair of the invariant matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleLevel {
    pub c0: Complex64,
    /// Ascending coefficients, normalised so the `tⁿ` coefficient is 1.
    pub poly_coeffs: Vec<Complex64>,
    /// Empty when `degenerate`.
    pub roots: Vec<Complex64>,
    pub all_real: bool,
    /// The eigenvector does not reach degree `n`; roots are omitted.
    pub degenerate: bool,
}

impl OracleLevel {
    pub fn has_real_c0(&self) -> bool {
        self.c0.im == 0.0
    }

    /// Real polynomial when both `c₀` and the coefficients are real.
    pub fn real_polynomial(&self) -> Option<Polynomial> {
        if !self.has_real_c0() || self.poly_coeffs.iter().any(|c| c.im != 0.0) {
            return None;
        }
        Some(Polynomial::new(
            self.poly_coeffs.iter().map(|c| c.re).collect(),
        ))
    }

    /// Ascending real parts of the roots if every root is real to `tol`
    /// (relative to `1 + |root|`) and the level itself is real.
    pub fn real_roots(&self, tol: f64) -> Option<Vec<f64>> {
        if self.degenerate || !self.has_real_c0() {
            return None;
        }
        if self
            .roots
            .iter()
            .any(|r| r.im.abs() > tol * (1.0 + r.re.abs()))
        {
            return None;
        }
        let mut out: Vec<f64> = self.roots.iter().map(|r| r.re).collect();
        out.sort_by(|a, b| a.total_cmp(b));
        Some(out)
    }

    /// Real, pairwise separated roots away from `0` and `α`: the levels a
    /// real Bethe solver can reach.
    pub fn is_bae_reachable(&self, alpha: f64, sep: f64) -> bool {
        let Some(r) = self.real_roots(REAL_ROOT_TOL) else {
            return false;
        };
        let scale = 1.0 + r.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        r.windows(2).all(|w| w[1] - w[0] > sep * scale)
            && r.iter()
                .all(|&x| x.abs() > sep * scale && (x - alpha).abs() > sep * scale)
    }
}

fn check_invariance(eq: &BasicEquation, n: usize) -> Result<()> {
    let leakage = eq.leakage(n);
    if leakage.abs() > INVARIANCE_TOL * (n as f64 * eq.b2).abs().max(1.0) {
        return Err(QesError::NotInvariant { leakage });
    }
    Ok(())
}

/// Matrix of `H` on `{1, t, …, tⁿ}`, built by applying `H` to each monomial.
pub fn invariant_matrix(eq: &BasicEquation, n: usize) -> Result<InvariantMatrix> {
    check_invariance(eq, n)?;
    let h = eq.with_c0(0.0);
    let mut entries = DMatrix::zeros(n + 1, n + 1);
    for k in 0..=n {
        let mut mono = vec![0.0; k + 1];
        mono[k] = 1.0;
        let image = h.apply(&Polynomial::new(mono));
        for (r, &c) in image.coeffs().iter().enumerate().take(n + 1) {
            entries[(r, k)] = c;
        }
    }
    Ok(InvariantMatrix { n, entries })
}

/// Diagonal, sub- and superdiagonal entries of the invariant matrix:
/// `d_k = k(k−1) + b₁k`, `(k+1,k) = b₂k + c₁`, `(k−1,k) = −αk(k−1) + b₀k`.
fn tridiagonal(eq: &BasicEquation, n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let d = (0..=n)
        .map(|k| {
            let k = k as f64;
            k * (k - 1.0) + eq.b1 * k
        })
        .collect();
    let sub = (0..n).map(|k| eq.b2 * k as f64 + eq.c1).collect();
    let sup = (1..=n)
        .map(|k| {
            let k = k as f64;
            -eq.alpha * k * (k - 1.0) + eq.b0 * k
        })
        .collect();
    (d, sub, sup)
}

/// `det(M − λI)` and its λ-derivative, both divided by a common positive
/// factor to avoid overflow. Their ratio is exact.
fn continuant(eq: &BasicEquation, n: usize, lambda: Complex64) -> (Complex64, Complex64) {
    let (d, sub, sup) = tridiagonal(eq, n);
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let (mut f_prev, mut g_prev) = (one, zero);
    let (mut f, mut g) = (d[0] - lambda, -one);
    for k in 1..=n {
        let coup = sub[k - 1] * sup[k - 1];
        let fk = (d[k] - lambda) * f - coup * f_prev;
        let gk = (d[k] - lambda) * g - f - coup * g_prev;
        f_prev = f;
        g_prev = g;
        f = fk;
        g = gk;
        let scale = f.norm().max(g.norm()).max(f_prev.norm()).max(g_prev.norm());
        if scale > 1e100 || (scale < 1e-100 && scale > 0.0) {
            f /= scale;
            g /= scale;
            f_prev /= scale;
            g_prev /= scale;
        }
    }
    (f, g)
}

/// Sign of `det(M − λI)` for real `λ` (`0.0` on an exact zero).
pub fn characteristic_sign(eq: &BasicEquation, n: usize, lambda: f64) -> f64 {
    let (f, _) = continuant(eq, n, Complex64::new(lambda, 0.0));
    if f.re == 0.0 {
        0.0
    } else {
        f.re.signum()
    }
}

fn polish_eigenvalue(eq: &BasicEquation, n: usize, mut lambda: Complex64) -> Complex64 {
    let real = lambda.im == 0.0;
    let mut best = continuant(eq, n, lambda).0.norm();
    for _ in 0..8 {
        let (f, g) = continuant(eq, n, lambda);
        if g.norm() == 0.0 {
            break;
        }
        let mut step = f / g;
        if real {
            step.im = 0.0;
        }
        let cand = lambda - step;
        let val = continuant(eq, n, cand).0.norm();
        if !(val < best) {
            break;
        }
        best = val;
        lambda = cand;
    }
    lambda
}

fn complex_matrix(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Eigenvector of `m` for `lambda` by inverse iteration.
fn eigenvector(m: &DMatrix<f64>, lambda: Complex64) -> DVector<Complex64> {
    let dim = m.nrows();
    let scale = 1.0 + m.amax() + lambda.norm();
    let shift = lambda + Complex64::new(scale * 1e-13, scale * 1e-13);
    let a = complex_matrix(m) - DMatrix::from_diagonal_element(dim, dim, shift);
    let lu = a.lu();
    let mut v = DVector::from_element(dim, Complex64::new(1.0, 0.0));
    for _ in 0..3 {
        match lu.solve(&v) {
            Some(next) if next.iter().all(|z| z.re.is_finite() && z.im.is_finite()) => {
                let norm = next.norm();
                if norm == 0.0 {
                    break;
                }
                v = next / Complex64::new(norm, 0.0);
            }
            _ => break,
        }
    }
    v
}

/// All `n+1` eigenpairs of the invariant matrix, sorted by `Re c₀`.
pub fn oracle_solutions(eq: &BasicEquation, n: usize) -> Result<Vec<OracleLevel>> {
    let m = invariant_matrix(eq, n)?.entries;
    let mut balanced = m.clone();
    balance_parlett_reinsch(&mut balanced);
    let schur = Schur::try_new(balanced, SCHUR_EPS, SCHUR_MAX_ITERS)
        .ok_or_else(|| QesError::Eigen(format!("QR iteration did not converge (n = {n})")))?;
    let mut eigenvalues: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|&z| polish_eigenvalue(eq, n, z))
        .collect();
    eigenvalues.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));

    let mut levels = Vec::with_capacity(n + 1);
    for c0 in eigenvalues {
        let v = eigenvector(&m, c0);
        let lead = v[n];
        let degenerate = lead.norm() <= DEGENERATE_TOL * v.camax();
        let poly_coeffs: Vec<Complex64> = if degenerate {
            v.iter().copied().collect()
        } else {
            let mut c: Vec<Complex64> = v.iter().map(|&z| z / lead).collect();
            c[n] = Complex64::new(1.0, 0.0);
            if c0.im == 0.0 {
                c.iter_mut().for_each(|z| z.im = 0.0);
            }
            c
        };
        let roots = if degenerate {
            Vec::new()
        } else {
            complex_poly_roots(&poly_coeffs)?
        };
        let all_real = !degenerate
            && roots
                .iter()
                .all(|r| r.im.abs() <= REAL_ROOT_TOL * (1.0 + r.re.abs()));
        levels.push(OracleLevel {
            c0,
            poly_coeffs,
            roots,
            all_real,
            degenerate,
        });
    }
    Ok(levels)
}

/// Roots of a real polynomial from the eigenvalues of its balanced
/// companion matrix, each refined by Newton's method.
pub fn poly_roots(coeffs: &[f64]) -> Result<Vec<Complex64>> {
    if coeffs.is_empty() || *coeffs.last().unwrap() == 0.0 {
        return Err(QesError::DegreeDeflation);
    }
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let mut comp = DMatrix::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    balance_parlett_reinsch(&mut comp);
    let schur = Schur::try_new(comp, SCHUR_EPS, SCHUR_MAX_ITERS)
        .ok_or_else(|| QesError::Eigen("companion QR iteration did not converge".into()))?;
    let c: Vec<Complex64> = coeffs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut roots: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|&z| polish_root(&c, z))
        .collect();
    sort_roots(&mut roots);
    Ok(roots)
}

fn complex_poly_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    if coeffs.iter().all(|z| z.im == 0.0) {
        return poly_roots(&coeffs.iter().map(|z| z.re).collect::<Vec<_>>());
    }
    let deg = coeffs.len() - 1;
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[deg];
    let mut comp = DMatrix::from_element(deg, deg, Complex64::new(0.0, 0.0));
    for i in 1..deg {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let schur = Schur::try_new(comp, SCHUR_EPS, SCHUR_MAX_ITERS)
        .ok_or_else(|| QesError::Eigen("complex companion QR iteration did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| QesError::Eigen("complex Schur form not triangular".into()))?;
    let mut roots: Vec<Complex64> = eig.iter().map(|&z| polish_root(coeffs, z)).collect();
    sort_roots(&mut roots);
    Ok(roots)
}

fn horner(c: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &ck in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + ck;
    }
    (p, dp)
}

fn polish_root(c: &[Complex64], mut z: Complex64) -> Complex64 {
    let real_input = c.iter().all(|x| x.im == 0.0);
    let real = real_input && z.im == 0.0;
    let mut best = horner(c, z).0.norm();
    for _ in 0..6 {
        let (p, dp) = horner(c, z);
        if dp.norm() == 0.0 || best == 0.0 {
            break;
        }
        let mut step = p / dp;
        if real {
            step.im = 0.0;
        }
        let cand = z - step;
        let val = horner(c, cand).0.norm();
        if !(val < best) {
            break;
        }
        best = val;
        z = cand;
    }
    z
}

fn sort_roots(roots: &mut [Complex64]) {
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Coefficients of `∏ (t − rᵢ)`, ascending.
pub fn expand_roots(roots: &[Complex64]) -> Vec<Complex64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (k, &ck) in c.iter().enumerate() {
            next[k + 1] += ck;
            next[k] -= r * ck;
        }
        c = next;
    }
    c
}
