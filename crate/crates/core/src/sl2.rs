//! sl(2) generators on polynomials of degree ≤ n and the expression of `H`
//! as a quadratic element of the algebra.
//!
//! ```text
//! J⁻ = d/dt,   J⁰ = t d/dt − n/2,   J⁺ = t² d/dt − n t
//! ```
//!
//! With these differential operators `[J⁰, J±] = ±J±` and `[J⁺, J⁻] = −2J⁰`.
//! All matrix entries are integers or half-integers, so every identity here
//! holds exactly in floating point for moderate `n`.

use nalgebra::DMatrix;

use crate::basic_ode::BasicEquation;
use crate::{QesError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorRep {
    pub n: usize,
    pub jplus: DMatrix<f64>,
    pub jzero: DMatrix<f64>,
    pub jminus: DMatrix<f64>,
}

impl GeneratorRep {
    pub fn dim(&self) -> usize {
        self.n + 1
    }

    /// `J⁰J⁰ − ½(J⁺J⁻ + J⁻J⁺)`.
    pub fn casimir(&self) -> DMatrix<f64> {
        &self.jzero * &self.jzero - (&self.jplus * &self.jminus + &self.jminus * &self.jplus) * 0.5
    }

    /// Eigenvalue of the Casimir on this representation, `j(j+1)` with `j = n/2`.
    pub fn casimir_value(&self) -> f64 {
        let j = self.n as f64 / 2.0;
        j * (j + 1.0)
    }
}

/// Generators on `{1, t, …, tⁿ}`; column `k` is the image of `tᵏ`.
pub fn generators(n: usize) -> GeneratorRep {
    let dim = n + 1;
    let nf = n as f64;
    let mut jplus = DMatrix::zeros(dim, dim);
    let mut jzero = DMatrix::zeros(dim, dim);
    let mut jminus = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let kf = k as f64;
        jzero[(k, k)] = kf - nf / 2.0;
        if k >= 1 {
            jminus[(k - 1, k)] = kf;
        }
        if k < n {
            jplus[(k + 1, k)] = kf - nf;
        }
    }
    GeneratorRep {
        n,
        jplus,
        jzero,
        jminus,
    }
}

fn commutator(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a * b - b * a
}

/// Largest entrywise defect over `[J⁰,J⁺] − J⁺`, `[J⁰,J⁻] + J⁻` and
/// `[J⁺,J⁻] + 2J⁰`.
pub fn commutator_report(n: usize) -> f64 {
    let g = generators(n);
    let defects = [
        commutator(&g.jzero, &g.jplus) - &g.jplus,
        commutator(&g.jzero, &g.jminus) + &g.jminus,
        commutator(&g.jplus, &g.jminus) + &g.jzero * 2.0,
    ];
    defects.iter().map(|d| d.amax()).fold(0.0, f64::max)
}

/// `H = J⁰J⁰ − αJ⁰J⁻ + b₂J⁺ + (n−1+b₁)J⁰ + (b₀ − nα/2)J⁻ + (n/2)(n/2−1+b₁)`.
pub fn algebraized_h(eq: &BasicEquation, n: usize) -> Result<DMatrix<f64>> {
    if !eq.is_qes_at(n) {
        return Err(QesError::NotQes {
            n,
            leakage: eq.leakage(n),
        });
    }
    let g = generators(n);
    let nf = n as f64;
    let dim = n + 1;
    let h = &g.jzero * &g.jzero - (&g.jzero * &g.jminus) * eq.alpha
        + &g.jplus * eq.b2
        + &g.jzero * (nf - 1.0 + eq.b1)
        + &g.jminus * (eq.b0 - nf * eq.alpha / 2.0)
        + DMatrix::identity(dim, dim) * ((nf / 2.0) * (nf / 2.0 - 1.0 + eq.b1));
    Ok(h)
}
