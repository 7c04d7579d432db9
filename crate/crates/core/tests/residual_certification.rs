mod common;

use proptest::prelude::*;
use qes_core::basic_ode::{relative_residual, residual};
use qes_core::bethe::solve_bae;
use qes_core::bethe::QesFamily;
use qes_core::models::solve_level;
use qes_core::Polynomial;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample_points(roots: &[f64], rng: &mut ChaCha8Rng) -> Vec<f64> {
    let lo = roots.iter().copied().fold(-1.0_f64, f64::min) - 1.0;
    let hi = roots.iter().copied().fold(1.0_f64, f64::max) + 1.0;
    (0..32).map(|_| rng.gen_range(lo..hi)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn accepted_solutions_satisfy_the_equation(seed in 0u64..1_000_000, n in 1usize..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let eq = common::random_qes(n, &mut rng);
        for sol in solve_bae(&eq, n, &common::cfg()).unwrap() {
            let s = Polynomial::from_roots(&sol.roots);
            let e = eq.with_c0(sol.c0);
            for t in sample_points(&sol.roots, &mut rng) {
                let r = relative_residual(&e, &s, t);
                prop_assert!(r < 1e-9, "n={} t={} residual {:e}", n, t, r);
            }
            let unit = s.scale(1.0 / s.max_abs_coeff());
            for _ in 0..32 {
                let t: f64 = rng.gen_range(-5.0..5.0);
                let r = residual(&e, &unit, t).abs();
                let bound = 1e-9 * (1.0 + t.abs().powi(n as i32 + 2));
                prop_assert!(r <= bound, "n={} t={} residual {:e}", n, t, r);
            }
        }
    }
}

#[test]
fn model_levels_satisfy_the_equation() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in common::model_grid() {
        let free = spec.kind.default_free();
        for n in 0..=3 {
            let family = spec.family(n).unwrap();
            for level in solve_level(&spec, n, free, &common::cfg()).unwrap() {
                let eq = family
                    .coefficients(level.free_param_value)
                    .equation()
                    .unwrap();
                assert!((eq.c0 - level.bethe.c0).abs() < 1e-9 * (1.0 + eq.c0.abs()));
                let s = Polynomial::new(level.poly_coeffs.clone());
                for t in sample_points(&level.bethe.roots, &mut rng) {
                    let r = relative_residual(&eq, &s, t);
                    assert!(r < 1e-9, "{} n={n} t={t}: {r:e}", spec.kind);
                }
            }
        }
    }
}
