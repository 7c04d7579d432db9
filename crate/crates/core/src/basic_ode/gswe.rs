use num_complex::Complex64;
use twofloat::TwoFloat;

use super::BasicEquation;
use crate::{QesError, Result};

/// Parameters of the generalized spheroidal wave equation
///
/// ```text
/// t(t-t₀) X'' + (B₁ + B₂ t) X' + [Ω² t(t-t₀) − 2kΩ(t-t₀) + B₃] X = 0
/// ```
///
/// which becomes the basic equation after `X = exp(iΩt) S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GsweParams {
    pub t0: f64,
    pub b1: f64,
    pub b2: f64,
    pub b3: f64,
    pub k: Complex64,
    pub omega: Complex64,
}

/// Relative tolerance for "purely imaginary" when mapping back.
const IMAGINARY_TOL: f64 = 1e-14;

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

/// `α c₁ − c₀ − (b₂/2)(b₀ + α b₁ + α² b₂)` in double-double, rounded once.
fn b3_relation(
    alpha: TwoFloat,
    b2: TwoFloat,
    b1: TwoFloat,
    b0: TwoFloat,
    c1: TwoFloat,
) -> TwoFloat {
    alpha * c1 - b2 * 0.5 * (b0 + alpha * b1 + alpha * alpha * b2)
}

pub fn to_gswe(eq: &BasicEquation) -> Result<GsweParams> {
    if eq.b2 == 0.0 {
        return Err(QesError::DegenerateScaling);
    }
    let (alpha, b2, b1, b0, c1) = (dd(eq.alpha), dd(eq.b2), dd(eq.b1), dd(eq.b0), dd(eq.c1));
    let big_b2 = b1 + alpha * b2;
    let k_im = (big_b2 - c1 * 2.0 / b2) * 0.5;
    let b3 = b3_relation(alpha, b2, b1, b0, c1) - eq.c0;
    Ok(GsweParams {
        t0: eq.alpha,
        b1: eq.b0,
        b2: f64::from(big_b2),
        b3: f64::from(b3),
        k: Complex64::new(0.0, f64::from(k_im)),
        omega: Complex64::new(0.0, -0.5 * eq.b2),
    })
}

pub fn from_gswe(g: &GsweParams) -> Result<BasicEquation> {
    let on_axis = |z: Complex64| z.re.abs() <= IMAGINARY_TOL * (1.0 + z.im.abs());
    if !on_axis(g.omega) {
        return Err(QesError::ComplexEquation(format!(
            "Omega = {} is not purely imaginary",
            g.omega
        )));
    }
    if !on_axis(g.k) {
        return Err(QesError::ComplexEquation(format!(
            "k = {} is not purely imaginary",
            g.k
        )));
    }
    if g.omega.im == 0.0 {
        return Err(QesError::DegenerateScaling);
    }
    let alpha = dd(g.t0);
    let b2 = dd(g.omega.im) * -2.0;
    let b1 = dd(g.b2) - alpha * b2;
    let b0 = dd(g.b1);
    let c1 = b2 * 0.5 * (dd(g.b2) - dd(g.k.im) * 2.0);
    let c0 = b3_relation(alpha, b2, b1, b0, c1) - g.b3;
    BasicEquation::new(
        g.t0,
        f64::from(b2),
        f64::from(b1),
        g.b1,
        f64::from(c1),
        f64::from(c0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Max-norm relative distance between two coefficient vectors.
    fn vec_rel(a: &[f64], b: &[f64]) -> f64 {
        let scale = b.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let diff = a
            .iter()
            .zip(b)
            .fold(0.0_f64, |m, (x, y)| m.max((x - y).abs()));
        diff / scale
    }

    #[test]
    fn identifications_on_simple_equation() {
        let eq = BasicEquation::new(0.0, -2.0, 0.0, 0.0, 2.0, 0.0).unwrap();
        let g = to_gswe(&eq).unwrap();
        assert_eq!(g.omega, Complex64::new(0.0, 1.0));
        assert_eq!(g.k, Complex64::new(0.0, 1.0));
    }

    #[test]
    fn zero_b2_is_degenerate() {
        let eq = BasicEquation::new(1.0, 0.0, 1.0, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(to_gswe(&eq), Err(QesError::DegenerateScaling)));
        let g = GsweParams {
            t0: 1.0,
            b1: 1.0,
            b2: 1.0,
            b3: 0.0,
            k: Complex64::new(0.0, 0.0),
            omega: Complex64::new(0.0, 0.0),
        };
        assert!(matches!(from_gswe(&g), Err(QesError::DegenerateScaling)));
    }

    #[test]
    fn inverse_of_hand_built_parameters() {
        // Ω = i/2 gives b2 = -1; B2 = b1 + α b2 gives b1 = 3; k = 0 gives c1 = -1.
        let mut g = GsweParams {
            t0: 1.0,
            b1: 1.0,
            b2: 2.0,
            b3: 0.0,
            k: Complex64::new(0.0, 0.0),
            omega: Complex64::new(0.0, 0.5),
        };
        // B3 = α c1 − c0 − (b2/2)(b0 + α b1 + α² b2) with c0 = 0
        g.b3 = -1.0 + 0.5 * (1.0 + 3.0 - 1.0);
        let eq = from_gswe(&g).unwrap();
        assert_eq!(
            (eq.alpha, eq.b2, eq.b1, eq.b0, eq.c1, eq.c0),
            (1.0, -1.0, 3.0, 1.0, -1.0, 0.0)
        );
    }

    #[test]
    fn complex_branch_rejected() {
        let g = GsweParams {
            t0: 1.0,
            b1: 1.0,
            b2: 1.0,
            b3: 0.0,
            k: Complex64::new(0.3, 0.0),
            omega: Complex64::new(0.0, 1.0),
        };
        assert!(matches!(from_gswe(&g), Err(QesError::ComplexEquation(_))));
    }

    proptest! {
        #[test]
        fn roundtrip_both_ways(
            alpha in -5.0..5.0f64, b2 in prop_oneof![-4.0..-0.1f64, 0.1..4.0f64],
            b1 in -5.0..5.0f64, b0 in -5.0..5.0f64, c1 in -5.0..5.0f64, c0 in -5.0..5.0f64,
        ) {
            let eq = BasicEquation::new(alpha, b2, b1, b0, c1, c0).unwrap();
            let g = to_gswe(&eq).unwrap();
            prop_assert_eq!(g.omega.re, 0.0);
            prop_assert_eq!(g.k.re, 0.0);
            let back = from_gswe(&g).unwrap();
            let err = vec_rel(&back.coefficients(), &eq.coefficients());
            prop_assert!(err < 1e-14, "from_gswe(to_gswe(eq)) off by {:e}", err);
            let g2 = to_gswe(&back).unwrap();
            let flat = |g: &GsweParams| [g.t0, g.b1, g.b2, g.b3, g.k.im, g.omega.im];
            let err = vec_rel(&flat(&g2), &flat(&g));
            prop_assert!(err < 1e-14, "to_gswe(from_gswe(g)) off by {:e}", err);
        }
    }
}
