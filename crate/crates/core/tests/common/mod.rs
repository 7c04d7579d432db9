#![allow(dead_code)]

use qes_core::bethe::SolverConfig;
use qes_core::models::{ModelKind, ModelSpec, Param};
use qes_core::BasicEquation;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random basic equation with `c₁ = −n·b₂`; every fourth one has `α = 0`.
pub fn random_qes(n: usize, rng: &mut ChaCha8Rng) -> BasicEquation {
    let b2 = -rng.gen_range(0.5..2.0);
    let alpha = if rng.gen_range(0..4) == 0 {
        0.0
    } else {
        rng.gen_range(-2.0..2.0)
    };
    BasicEquation::new(
        alpha,
        b2,
        rng.gen_range(-3.0..5.0),
        rng.gen_range(-3.0..3.0),
        -(n as f64) * b2,
        0.0,
    )
    .unwrap()
}

pub fn cfg() -> SolverConfig {
    SolverConfig::default()
}

pub fn spec(kind: ModelKind, ell: i32, params: &[(Param, f64)]) -> ModelSpec {
    ModelSpec::partial(kind, ell, params).unwrap()
}

/// Three fixed-parameter points per model, free parameter omitted.
pub fn model_grid() -> Vec<ModelSpec> {
    use ModelKind::*;
    use Param::*;
    vec![
        spec(Anharmonic, 0, &[(E, 2.0), (D, 0.5)]),
        spec(Anharmonic, 1, &[(E, 1.0), (D, 1.0)]),
        spec(Anharmonic, 0, &[(E, 3.0), (D, 0.25)]),
        spec(Isotonic, 0, &[(Omega, 1.0), (A, 1.0)]),
        spec(Isotonic, 1, &[(Omega, 1.0), (A, 0.8)]),
        spec(Isotonic, 0, &[(Omega, 2.0), (A, 0.6)]),
        spec(SoftCoreCoulomb, 0, &[(Beta, 1.0), (BigG, 0.5)]),
        spec(SoftCoreCoulomb, 1, &[(Beta, 0.5), (BigG, 0.0)]),
        spec(SoftCoreCoulomb, 0, &[(Beta, 2.0), (BigG, 1.0)]),
        spec(NonPolynomial, 0, &[(Omega, 1.0), (Delta, 1.0)]),
        spec(NonPolynomial, 1, &[(Omega, 2.0), (Delta, 1.0)]),
        spec(NonPolynomial, 0, &[(Omega, 1.0), (Delta, 0.5)]),
    ]
}

/// 3×3 grid of fixed-parameter choices per model, free parameter omitted.
pub fn golden_grid() -> Vec<ModelSpec> {
    use ModelKind::*;
    use Param::*;
    let mut out = Vec::new();
    for x in [1.0, 2.0, 3.0] {
        for y in [0.25, 0.5, 1.0] {
            out.push(spec(Anharmonic, 0, &[(E, x), (D, y)]));
        }
    }
    for x in [0.5, 1.0, 2.0] {
        for y in [0.6, 1.0, 1.3] {
            out.push(spec(Isotonic, 0, &[(Omega, x), (A, y)]));
        }
    }
    for x in [0.5, 1.0, 2.0] {
        for y in [0.0, 0.5, 1.0] {
            out.push(spec(SoftCoreCoulomb, 0, &[(Beta, x), (BigG, y)]));
        }
    }
    for x in [0.5, 1.0, 2.0] {
        for y in [0.5, 1.0, 2.0] {
            out.push(spec(NonPolynomial, 0, &[(Omega, x), (Delta, y)]));
        }
    }
    out
}
