//! The basic equation `t(t−α)S″ + (b₂t² + b₁t + b₀)S′ + c₁tS = c₀S`.

mod gswe;
mod polynomial;

pub use gswe::{from_gswe, to_gswe, GsweParams};
pub use polynomial::Polynomial;

use crate::{QesError, Result};

/// Absolute tolerance on `−c₁/b₂` when testing for an integer degree.
pub const QES_DEGREE_TOL: f64 = 1e-9;

/// Relative tolerance on `c₁ = −n·b₂` for an equation tagged QES of degree n.
pub const QES_TAG_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasicEquation {
    /// Location of the second regular singular point (the first is `t = 0`).
    pub alpha: f64,
    pub b2: f64,
    pub b1: f64,
    pub b0: f64,
    pub c1: f64,
    /// Right-hand side constant, the eigenvalue of `H`.
    pub c0: f64,
}

impl BasicEquation {
    pub fn new(alpha: f64, b2: f64, b1: f64, b0: f64, c1: f64, c0: f64) -> Result<Self> {
        let eq = BasicEquation {
            alpha,
            b2,
            b1,
            b0,
            c1,
            c0,
        };
        if eq.coefficients().iter().any(|c| !c.is_finite()) {
            return Err(QesError::Domain(format!(
                "non-finite coefficient in {:?}",
                eq.coefficients()
            )));
        }
        Ok(eq)
    }

    /// `(α, b₂, b₁, b₀, c₁, c₀)`.
    pub fn coefficients(&self) -> [f64; 6] {
        [self.alpha, self.b2, self.b1, self.b0, self.c1, self.c0]
    }

    pub fn with_c0(&self, c0: f64) -> Self {
        BasicEquation { c0, ..*self }
    }

    /// `b₂t² + b₁t + b₀`, the first-derivative coefficient.
    pub fn drift(&self, t: f64) -> f64 {
        (self.b2 * t + self.b1) * t + self.b0
    }

    /// `c₁ + n·b₂`: the coefficient that must vanish for `Pₙ₊₁` to be invariant.
    pub fn leakage(&self, n: usize) -> f64 {
        self.c1 + n as f64 * self.b2
    }

    /// True when `c₁ = −n·b₂` to relative tolerance [`QES_TAG_RTOL`].
    pub fn is_qes_at(&self, n: usize) -> bool {
        let scale = self.c1.abs().max((n as f64 * self.b2).abs());
        self.leakage(n).abs() <= QES_TAG_RTOL * scale.max(f64::MIN_POSITIVE)
            || self.leakage(n) == 0.0
    }

    /// Apply the operator `H − c₀` to a polynomial, exactly in coefficient space.
    pub fn apply(&self, s: &Polynomial) -> Polynomial {
        let d1 = s.derivative();
        let d2 = d1.derivative();
        let second = Polynomial::new(vec![0.0, -self.alpha, 1.0]);
        let drift = Polynomial::new(vec![self.b0, self.b1, self.b2]);
        let zeroth = Polynomial::new(vec![-self.c0, self.c1]);
        let a = &second * &d2;
        let b = &drift * &d1;
        let c = &zeroth * s;
        &(&a + &b) + &c
    }
}

/// Left side minus right side of the basic equation for `S = s`, at `t`.
pub fn residual(eq: &BasicEquation, s: &Polynomial, t: f64) -> f64 {
    eq.apply(s).eval(t)
}

/// Magnitude bound for evaluating the basic equation term by term in
/// coefficient space: every coefficient and `t` replaced by its absolute value.
pub fn residual_scale(eq: &BasicEquation, s: &Polynomial, t: f64) -> f64 {
    let abs = |p: &Polynomial| Polynomial::new(p.coeffs().iter().map(|c| c.abs()).collect());
    let d1 = s.derivative();
    let d2 = d1.derivative();
    let x = t.abs();
    let v = abs(s).eval(x);
    x * (x + eq.alpha.abs()) * abs(&d2).eval(x)
        + ((eq.b2.abs() * x + eq.b1.abs()) * x + eq.b0.abs()) * abs(&d1).eval(x)
        + (eq.c1.abs() * x + eq.c0.abs()) * v
}

/// Residual divided by [`residual_scale`]; zero where every term vanishes.
pub fn relative_residual(eq: &BasicEquation, s: &Polynomial, t: f64) -> f64 {
    let scale = residual_scale(eq, s, t);
    if scale == 0.0 {
        return residual(eq, s, t).abs();
    }
    residual(eq, s, t).abs() / scale
}

/// The degree `n` for which `c₁ = −n·b₂`, if `−c₁/b₂` is a nonnegative integer.
pub fn qes_degree(eq: &BasicEquation) -> Option<usize> {
    if eq.b2 == 0.0 {
        return None;
    }
    let x = -eq.c1 / eq.b2;
    let n = x.round();
    if n >= 0.0 && (x - n).abs() <= QES_DEGREE_TOL {
        Some(n as usize)
    } else {
        None
    }
}
