//! Explicit formulas for degrees 0 and 1, used as references for the
//! Newton path. Degree-1 couplings come from polynomial equations in a
//! single unknown; only the isotonic quartic needs a numerical root finder.

use super::{energy_of, reduce, ModelKind, ModelSpec, Param};
use crate::basic_ode::Polynomial;
use crate::bethe::QesFamily;
use crate::oracle::poly_roots;
use crate::{QesError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ClosedFormLevel {
    pub n: usize,
    pub free_param: Param,
    pub free_value: f64,
    pub energy: f64,
    /// Root of the degree-1 polynomial, absent at degree 0.
    pub t1: Option<f64>,
    /// Sign in front of the square root in the `t₁` formula (0 at degree 0).
    pub branch: i8,
}

fn no_level(msg: impl Into<String>) -> QesError {
    QesError::NoRealLevel(msg.into())
}

/// Both roots `(−b ∓ √(b²−4ac))/(2a)` of `ax² + bx + c`, or one root of a
/// linear equation.
fn real_quadratic_roots(a: f64, b: f64, c: f64) -> Result<Vec<f64>> {
    if a == 0.0 {
        return if b == 0.0 {
            Err(no_level("degenerate quadratic"))
        } else {
            Ok(vec![-c / b])
        };
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return Err(no_level(format!("negative discriminant {disc}")));
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let mut r = if q == 0.0 {
        vec![0.0, 0.0]
    } else {
        vec![q / a, c / q]
    };
    r.sort_by(|x, y| x.total_cmp(y));
    Ok(r)
}

/// The two branches `[−, +]` of the quadratic formula for `t₁` at degree 1,
/// evaluated on a fully parametrised model.
pub fn first_root_branches(spec: &ModelSpec) -> Result<[f64; 2]> {
    spec.validate(None)?;
    let l = spec.ell as f64;
    let pm = |centre: f64, disc: f64, scale: f64| -> Result<[f64; 2]> {
        if disc < 0.0 {
            return Err(no_level(format!("negative discriminant {disc}")));
        }
        Ok([
            scale * (centre - disc.sqrt()),
            scale * (centre + disc.sqrt()),
        ])
    };
    match spec.kind {
        ModelKind::Anharmonic => {
            let w = spec.get(Param::Omega)?;
            let s = (2.0 * spec.get(Param::D)?).sqrt();
            let u = spec.get(Param::E)? / s;
            pm(2.0 + u, (2.0 + u) * (2.0 + u) + 4.0 * w * s, 0.5 / w)
        }
        ModelKind::Isotonic => {
            let aa = spec.get(Param::Omega)? * spec.get(Param::A)?.powi(2);
            let q = (4.0 * spec.get(Param::G)? + 1.0).sqrt();
            let s1 = 0.5 * (1.0 - q);
            let s2 = l + 1.5;
            pm(
                2.0 * s1 + s2 + aa,
                (2.0 * s1 + s2).powi(2) + aa * (2.0 * s2 - 4.0 * s1 + aa),
                0.5,
            )
        }
        ModelKind::SoftCoreCoulomb => {
            let beta = spec.get(Param::Beta)?;
            let c = (spec.get(Param::Z)? - spec.get(Param::BigG)?) / (l + 3.0);
            pm(
                -beta * c + l + 2.0,
                beta * beta * c * c + 2.0 * l * beta * c + (l + 2.0).powi(2),
                0.5 / c,
            )
        }
        ModelKind::NonPolynomial => {
            let r = spec.get(Param::Omega)? / spec.get(Param::Delta)?;
            pm(
                r + l + 3.5,
                r * r + r * (2.0 * l - 1.0) + (l + 3.5).powi(2),
                0.5,
            )
        }
    }
    .map(|mut b| {
        b.sort_by(|x, y| x.total_cmp(y));
        b
    })
}

fn branch_of(spec: &ModelSpec, t1: f64) -> Result<i8> {
    let b = first_root_branches(spec)?;
    Ok(if (b[0] - t1).abs() <= (b[1] - t1).abs() {
        -1
    } else {
        1
    })
}

/// Reference levels for degree `n ∈ {0, 1}` with the model's default free
/// parameter released. Values outside the solver's search range, or that
/// violate the model's domain, are omitted.
pub fn closed_form(spec: &ModelSpec, n: usize) -> Result<Vec<ClosedFormLevel>> {
    let free = spec.kind.default_free();
    spec.validate(Some(free))?;
    if n > 1 {
        return Err(QesError::InvalidModel(format!(
            "closed forms exist for n = 0 and n = 1, not {n}"
        )));
    }
    let l = spec.ell as f64;
    let candidates: Vec<(f64, Option<f64>)> = match (spec.kind, n) {
        (ModelKind::Anharmonic, 0) => {
            let s = (2.0 * spec.get(Param::D)?).sqrt();
            let u = spec.get(Param::E)? / s;
            vec![(((u + 1.0).powi(2) - (l + 0.5).powi(2)) / (2.0 * s), None)]
        }
        (ModelKind::Anharmonic, _) => {
            let s = (2.0 * spec.get(Param::D)?).sqrt();
            let u = spec.get(Param::E)? / s;
            let p = u * u + 4.0 * u + 5.0 - (l + 0.5).powi(2);
            // X = ωs solves X² − (P+4)X + (P² − 4(2+u)²)/4 = 0.
            real_quadratic_roots(1.0, -(p + 4.0), 0.25 * (p * p - 4.0 * (2.0 + u).powi(2)))?
                .into_iter()
                .map(|x| {
                    let w = x / s;
                    let sigma = if p - 2.0 * x >= 0.0 { 1.0 } else { -1.0 };
                    let t1 = (2.0 + u + sigma * ((2.0 + u).powi(2) + 4.0 * x).sqrt()) / (2.0 * w);
                    (w, Some(t1))
                })
                .collect()
        }
        (ModelKind::Isotonic, 0) => {
            let aa = spec.get(Param::Omega)? * spec.get(Param::A)?.powi(2);
            vec![(2.0 * (l + 1.0 + aa) * (2.0 * l + 3.0 + 2.0 * aa), None)]
        }
        (ModelKind::Isotonic, _) => {
            let aa = spec.get(Param::Omega)? * spec.get(Param::A)?.powi(2);
            isotonic_first_couplings(l, aa)?
        }
        (ModelKind::SoftCoreCoulomb, 0) => {
            if spec.ell == -1 {
                return Err(no_level(
                    "soft-core ground-state coupling is singular at l = -1",
                ));
            }
            let beta = spec.get(Param::Beta)?;
            let g = spec.get(Param::BigG)?;
            vec![((l + 2.0) / beta - g / (l + 1.0), None)]
        }
        (ModelKind::SoftCoreCoulomb, _) => {
            let beta = spec.get(Param::Beta)?;
            let g = spec.get(Param::BigG)?;
            let k = 2.0 * l + 3.0 - beta * g;
            let a2 = beta * beta * (l + 2.0) * (l + 1.0);
            let a1 = beta * ((l + 2.0).powi(2) - (l + 1.0) - k * (2.0 * l + 3.0));
            let a0 = k * (k - l - 2.0);
            real_quadratic_roots(a2, a1, a0)?
                .into_iter()
                .filter(|&c| c != 0.0)
                .map(|c| (g + (l + 3.0) * c, Some((k - beta * (l + 2.0) * c) / c)))
                .collect()
        }
        (ModelKind::NonPolynomial, 0) => {
            let dl = spec.get(Param::Delta)?;
            let r = spec.get(Param::Omega)? / dl;
            vec![(-2.0 * dl * dl * (r + l + 1.5), None)]
        }
        (ModelKind::NonPolynomial, _) => {
            let dl = spec.get(Param::Delta)?;
            let r = spec.get(Param::Omega)? / dl;
            let probe = spec.with_param(Param::Lambda, 0.0);
            first_root_branches(&probe)?
                .into_iter()
                .map(|t1| (2.0 * dl * dl * (t1 - 2.0 * (r + l + 2.5)), Some(t1)))
                .collect()
        }
    };

    let family = reduce(spec, n, free)?;
    let range = family.search_range();
    let mut out = Vec::new();
    for (p, t1) in candidates {
        if !p.is_finite() || !range.contains(p) {
            continue;
        }
        let model = spec.with_param(free, p);
        if model.validate(None).is_err() {
            continue;
        }
        if model.kind == ModelKind::SoftCoreCoulomb && family.soft_core_decay(p) <= 0.0 {
            continue;
        }
        let branch = match t1 {
            Some(t) => branch_of(&model, t)?,
            None => 0,
        };
        out.push(ClosedFormLevel {
            n,
            free_param: free,
            free_value: p,
            energy: energy_of(&model, n)?,
            t1,
            branch,
        });
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}

/// Degree-1 isotonic couplings. Writing `Q = √(4g+1)`, squaring the
/// two-branch constraint gives a quartic in `Q`; real roots `Q ≥ 1` are
/// kept and `t₁` is taken on the branch selected by the sign of its
/// left-hand side.
fn isotonic_first_couplings(l: f64, aa: f64) -> Result<Vec<(f64, Option<f64>)>> {
    // L(Q) = (Q² − 1)/4 + 2(ℓ+A+2) − (5/2+ℓ+A)Q
    let lhs = Polynomial::new(vec![-0.25 + 2.0 * (l + aa + 2.0), -(2.5 + l + aa), 0.25]);
    // R(Q) = (5/2+ℓ−Q)² + A(2ℓ+A+1+2Q)
    let m = Polynomial::new(vec![2.5 + l, -1.0]);
    let rhs = &(&m * &m) + &Polynomial::new(vec![aa * (2.0 * l + aa + 1.0), 2.0 * aa]);
    let quartic = &(&lhs * &lhs) + &rhs.scale(-1.0);
    let dq = quartic.derivative();
    let mut out = Vec::new();
    for z in poly_roots(quartic.coeffs())? {
        if z.im.abs() > 1e-7 * (1.0 + z.re.abs()) {
            continue;
        }
        let mut q = z.re;
        for _ in 0..4 {
            let d = dq.eval(q);
            if d == 0.0 {
                break;
            }
            q -= quartic.eval(q) / d;
        }
        if q < 1.0 {
            continue;
        }
        let g = 0.25 * (q * q - 1.0);
        let sigma = if lhs.eval(q) >= 0.0 { 1.0 } else { -1.0 };
        let s1 = 0.5 * (1.0 - q);
        let s2 = l + 1.5;
        let disc = (2.0 * s1 + s2).powi(2) + aa * (2.0 * s2 - 4.0 * s1 + aa);
        let t1 = 0.5 * (2.0 * s1 + s2 + aa + sigma * disc.max(0.0).sqrt());
        out.push((g, Some(t1)));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_couplings() {
        let an = ModelSpec::partial(
            ModelKind::Anharmonic,
            0,
            &[(Param::E, 2.0), (Param::D, 0.5)],
        )
        .unwrap();
        let lv = closed_form(&an, 0).unwrap();
        assert_eq!(lv[0].free_value, 4.375);
        assert_eq!(lv[0].energy, 17.5);

        let iso = ModelSpec::partial(
            ModelKind::Isotonic,
            0,
            &[(Param::Omega, 1.0), (Param::A, 1.0)],
        )
        .unwrap();
        let lv = closed_form(&iso, 0).unwrap();
        assert_eq!(lv[0].free_value, 20.0);
        assert_eq!(lv[0].energy, -6.5);
        // √(4g+1) = 4(ℓ+1+ωa²)+1
        assert_eq!((4.0 * lv[0].free_value + 1.0).sqrt(), 9.0);

        let sc = ModelSpec::partial(
            ModelKind::SoftCoreCoulomb,
            0,
            &[(Param::Beta, 1.0), (Param::BigG, 0.5)],
        )
        .unwrap();
        let lv = closed_form(&sc, 0).unwrap();
        assert_eq!(lv[0].free_value, 1.5);
        assert_eq!(lv[0].energy, -0.125);

        let np = ModelSpec::partial(
            ModelKind::NonPolynomial,
            0,
            &[(Param::Omega, 1.0), (Param::Delta, 1.0)],
        )
        .unwrap();
        let lv = closed_form(&np, 0).unwrap();
        assert_eq!(lv[0].free_value, -5.0);
        assert_eq!(lv[0].energy, -1.5);
    }

    #[test]
    fn non_polynomial_first_roots() {
        let np = ModelSpec::partial(
            ModelKind::NonPolynomial,
            0,
            &[(Param::Omega, 1.0), (Param::Delta, 1.0)],
        )
        .unwrap();
        let lv = closed_form(&np, 1).unwrap();
        assert_eq!(lv.len(), 2);
        for l in &lv {
            let t = l.t1.unwrap();
            assert!((t * t - 4.5 * t + 2.0).abs() < 1e-12);
        }
        assert_eq!(lv[0].t1, Some(0.5));
        assert_eq!(lv[0].free_value, -13.0);
        assert_eq!(lv[1].t1, Some(4.0));
        assert_eq!(lv[1].free_value, -6.0);
    }

    #[test]
    fn anharmonic_first_constraint_holds() {
        let an = ModelSpec::partial(
            ModelKind::Anharmonic,
            0,
            &[(Param::E, 2.0), (Param::D, 0.5)],
        )
        .unwrap();
        for lv in closed_form(&an, 1).unwrap() {
            let w = lv.free_value;
            let t = lv.t1.unwrap();
            let (s, u, k) = (1.0, 2.0, 0.25);
            assert!((w * t * t - (2.0 + u) * t - s).abs() < 1e-10);
            let lhs = 0.25 * (u * u - 2.0 * w * s + 5.0 + 4.0 * u - k).powi(2);
            let rhs = (2.0 + u).powi(2) + 4.0 * w * s;
            assert!((lhs - rhs).abs() < 1e-10 * rhs);
            let general = 2.0 * w * (s + 2.0 * t) + k - 4.0 * (2.0 + u) - (u + 1.0).powi(2);
            assert!(general.abs() < 1e-10 * rhs);
        }
    }

    #[test]
    fn isotonic_first_couplings_unit_case() {
        let iso = ModelSpec::partial(
            ModelKind::Isotonic,
            0,
            &[(Param::Omega, 1.0), (Param::A, 1.0)],
        )
        .unwrap();
        let lv = closed_form(&iso, 1).unwrap();
        assert!(!lv.is_empty());
        for l in &lv {
            let q = (4.0 * l.free_value + 1.0).sqrt();
            assert!((q.powi(3) - 27.0 * q * q + 199.0 * q - 397.0).abs() < 1e-8 * q.powi(3));
        }
    }

    #[test]
    fn quadratic_helper() {
        assert_eq!(
            real_quadratic_roots(1.0, -3.0, 2.0).unwrap(),
            vec![1.0, 2.0]
        );
        assert!(real_quadratic_roots(1.0, 0.0, 1.0).is_err());
        assert_eq!(real_quadratic_roots(0.0, 2.0, -4.0).unwrap(), vec![2.0]);
    }

    #[test]
    fn higher_degree_rejected() {
        let np = ModelSpec::partial(
            ModelKind::NonPolynomial,
            0,
            &[(Param::Omega, 1.0), (Param::Delta, 1.0)],
        )
        .unwrap();
        assert!(closed_form(&np, 2).is_err());
    }
}
