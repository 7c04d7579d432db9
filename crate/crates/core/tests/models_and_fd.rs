mod common;

use qes_core::models::{
    closed_form, first_root_branches, solve_level, wavefunction, ModelKind, Param,
};
use qes_core::verifier::verify_energy;

#[test]
fn newton_roots_match_quadratic_formula() {
    for spec in common::model_grid() {
        let free = spec.kind.default_free();
        let levels = solve_level(&spec, 1, free, &common::cfg()).unwrap();
        assert!(!levels.is_empty(), "{spec:?}");
        for level in levels {
            let t1 = level.bethe.roots[0];
            let branches = first_root_branches(&level.model).unwrap();
            let rel = branches
                .iter()
                .map(|b| (b - t1).abs() / t1.abs().max(1e-300))
                .fold(f64::INFINITY, f64::min);
            assert!(rel < 1e-10, "{} t1={t1} branches={branches:?}", spec.kind);
        }
    }
}

#[test]
fn closed_forms_agree_with_joint_solver() {
    for spec in common::golden_grid() {
        let free = spec.kind.default_free();
        for n in 0..=1 {
            let mut cf = closed_form(&spec, n).unwrap();
            let lv = solve_level(&spec, n, free, &common::cfg()).unwrap();
            cf.sort_by(|a, b| a.energy.total_cmp(&b.energy));
            assert_eq!(cf.len(), lv.len(), "{} n={n}", spec.kind);
            for (c, l) in cf.iter().zip(&lv) {
                let tol = 1e-9 * (1.0 + c.free_value.abs());
                assert!(
                    (c.free_value - l.free_param_value).abs() < tol,
                    "{c:?} vs {l:?}"
                );
                assert!((c.energy - l.energy).abs() < 1e-9 * (1.0 + c.energy.abs()));
                assert!(l.constraint_residual.abs() <= 1e-10, "{l:?}");
            }
        }
    }
}

#[test]
fn ground_state_goldens() {
    use ModelKind::*;
    use Param::*;
    let cases = [
        (
            common::spec(Anharmonic, 0, &[(E, 2.0), (D, 0.5)]),
            Omega,
            4.375,
            17.5,
        ),
        (
            common::spec(Isotonic, 0, &[(Omega, 1.0), (A, 1.0)]),
            G,
            20.0,
            -6.5,
        ),
        (
            common::spec(SoftCoreCoulomb, 0, &[(Beta, 1.0), (BigG, 0.5)]),
            Z,
            1.5,
            -0.125,
        ),
        (
            common::spec(NonPolynomial, 0, &[(Omega, 1.0), (Delta, 1.0)]),
            Lambda,
            -5.0,
            -1.5,
        ),
    ];
    for (spec, free, p, e) in cases {
        let lv = solve_level(&spec, 0, free, &common::cfg()).unwrap();
        assert_eq!(lv.len(), 1, "{}", spec.kind);
        assert!((lv[0].free_param_value - p).abs() < 1e-10 * (1.0 + p.abs()));
        assert!((lv[0].energy - e).abs() < 1e-10 * (1.0 + e.abs()));
        let fd = verify_energy(&lv[0].model, e, 0).unwrap();
        assert!(fd.passed(), "{fd:?}");
        assert_eq!(fd.node_count, 0);
    }
}

#[test]
fn isotonic_ground_state_exponent() {
    let spec = common::spec(
        ModelKind::Isotonic,
        0,
        &[(Param::Omega, 1.0), (Param::A, 1.0)],
    );
    let lv = solve_level(&spec, 0, Param::G, &common::cfg()).unwrap();
    let wf = wavefunction(&lv[0]).unwrap();
    let power = wf.prefactor.factors[0].power;
    assert!((power + 4.0).abs() < 1e-12, "{power}");
}

#[test]
fn node_count_law_and_fd_energies() {
    for spec in common::model_grid() {
        let free = spec.kind.default_free();
        for n in 0..=2 {
            for level in solve_level(&spec, n, free, &common::cfg()).unwrap() {
                let wf = wavefunction(&level).unwrap();
                assert!(wf.is_normalizable(), "{} n={n}", spec.kind);
                assert_eq!(wf.expected_nodes(), level.node_roots);
                assert_eq!(wf.node_radii().len(), level.node_roots);
                let fd = verify_energy(&level.model, level.energy, level.node_roots).unwrap();
                assert!(fd.passed(), "{} n={n}: {fd:?}", spec.kind);
                assert_eq!(fd.node_count, level.node_roots, "{} n={n}", spec.kind);
                assert_eq!(fd.level_index, level.node_roots);
            }
        }
    }
}
