use serde::{Deserialize, Serialize};

use super::{ModelKind, ModelSpec, Param, QesLevel};
use crate::Result;

/// How the polynomial variable `t` depends on `r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VariableMap {
    /// `t = r`.
    Identity,
    /// `t = r²`.
    Square,
    /// `t = scale·r² + shift`.
    ShiftedScaledSquare { scale: f64, shift: f64 },
}

impl VariableMap {
    pub fn apply(&self, r: f64) -> f64 {
        match *self {
            VariableMap::Identity => r,
            VariableMap::Square => r * r,
            VariableMap::ShiftedScaledSquare { scale, shift } => scale * r * r + shift,
        }
    }

    /// The radius `r > 0` with `t(r) = t`, if any.
    pub fn radius_of(&self, t: f64) -> Option<f64> {
        let r = match *self {
            VariableMap::Identity => t,
            VariableMap::Square => t.max(0.0).sqrt().copysign(t),
            VariableMap::ShiftedScaledSquare { scale, shift } => {
                let x = (t - shift) / scale;
                x.max(0.0).sqrt().copysign(x)
            }
        };
        (r > 0.0).then_some(r)
    }
}

/// `(c₂r² + c₁r + c₀)^power`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolyFactor {
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    pub power: f64,
}

/// `r^r_power · Π factors · exp(gaussian·r² + linear·r + inverse_square/r² + constant)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prefactor {
    pub r_power: f64,
    pub factors: Vec<PolyFactor>,
    pub gaussian: f64,
    pub linear: f64,
    pub inverse_square: f64,
    pub constant: f64,
}

impl Prefactor {
    fn log_abs_and_sign(&self, r: f64) -> (f64, f64) {
        let mut log = self.r_power * r.ln()
            + self.gaussian * r * r
            + self.linear * r
            + self.inverse_square / (r * r)
            + self.constant;
        let mut sign = 1.0;
        for f in &self.factors {
            let base = (f.c2 * r + f.c1) * r + f.c0;
            log += f.power * base.abs().ln();
            if base < 0.0 && f.power.fract() == 0.0 && (f.power as i64) % 2 != 0 {
                sign = -sign;
            }
        }
        (log, sign)
    }
}

/// Unnormalised `u(r) = prefactor(r) · Π (t(r) − tᵢ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialWavefunction {
    pub model: ModelSpec,
    pub prefactor: Prefactor,
    pub polynomial_roots: Vec<f64>,
    pub variable_map: VariableMap,
}

impl RadialWavefunction {
    /// `(ln|u(r)|, sign u(r))`; `ln|u| = −∞` on a node.
    pub fn log_abs_and_sign(&self, r: f64) -> (f64, f64) {
        let (mut log, mut sign) = self.prefactor.log_abs_and_sign(r);
        let t = self.variable_map.apply(r);
        for &ti in &self.polynomial_roots {
            let x = t - ti;
            log += x.abs().ln();
            if x < 0.0 {
                sign = -sign;
            }
        }
        (log, sign)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let (log, sign) = self.log_abs_and_sign(r);
        sign * log.exp()
    }

    /// Samples of `u` on `rs`, divided by the largest magnitude.
    pub fn sample_scaled(&self, rs: &[f64]) -> Vec<f64> {
        let ls: Vec<(f64, f64)> = rs.iter().map(|&r| self.log_abs_and_sign(r)).collect();
        let max = ls
            .iter()
            .map(|x| x.0)
            .filter(|x| x.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        ls.iter().map(|&(l, s)| s * (l - max).exp()).collect()
    }

    /// Number of roots mapping to a positive radius.
    pub fn expected_nodes(&self) -> usize {
        self.polynomial_roots
            .iter()
            .filter(|&&t| self.variable_map.radius_of(t).is_some())
            .count()
    }

    /// Node radii, ascending.
    pub fn node_radii(&self) -> Vec<f64> {
        let mut r: Vec<f64> = self
            .polynomial_roots
            .iter()
            .filter_map(|&t| self.variable_map.radius_of(t))
            .collect();
        r.sort_by(|a, b| a.total_cmp(b));
        r
    }

    /// `ln ∫_{r_lo}^{r_hi} u² dr` by the trapezoid rule on `points` nodes.
    pub fn log_norm(&self, r_lo: f64, r_hi: f64, points: usize) -> f64 {
        let h = (r_hi - r_lo) / (points - 1) as f64;
        let logs: Vec<f64> = (0..points)
            .map(|i| 2.0 * self.log_abs_and_sign(r_lo + i as f64 * h).0)
            .collect();
        let max = logs
            .iter()
            .copied()
            .filter(|x| x.is_finite())
            .fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = logs
            .iter()
            .enumerate()
            .map(|(i, &l)| {
                let w = if i == 0 || i == points - 1 { 0.5 } else { 1.0 };
                w * (l - max).exp()
            })
            .sum();
        max + (sum * h).ln()
    }

    /// `∫u²` over `[1e-4, R]` changes by less than `1e-8` relative when `R`
    /// doubles, with `R` thirty natural length units.
    pub fn is_normalizable(&self) -> bool {
        let r = 30.0 * self.length_scale();
        let a = self.log_norm(1e-4, r, 20_001);
        let b = self.log_norm(1e-4, 2.0 * r, 40_001);
        a.is_finite() && b.is_finite() && (b - a).abs() < 1e-8
    }

    /// Natural length of the model: `1/√ω` for oscillators, `1/c` for soft-core.
    pub fn length_scale(&self) -> f64 {
        if self.prefactor.gaussian < 0.0 {
            1.0 / (-2.0 * self.prefactor.gaussian).sqrt()
        } else if self.prefactor.linear < 0.0 {
            1.0 / -self.prefactor.linear
        } else {
            1.0
        }
    }
}

/// Assemble the radial wavefunction of a solved level.
pub fn wavefunction(level: &QesLevel) -> Result<RadialWavefunction> {
    let spec = &level.model;
    let l = spec.ell as f64;
    let n = level.n as f64;
    let (prefactor, variable_map) = match spec.kind {
        ModelKind::Anharmonic => {
            let w = spec.get(Param::Omega)?;
            let s = (2.0 * spec.get(Param::D)?).sqrt();
            let e = spec.get(Param::E)?;
            (
                Prefactor {
                    r_power: 1.5 + e / s,
                    factors: Vec::new(),
                    gaussian: -w / 2.0,
                    linear: 0.0,
                    inverse_square: -s / 2.0,
                    constant: 0.0,
                },
                VariableMap::Square,
            )
        }
        ModelKind::Isotonic => {
            let w = spec.get(Param::Omega)?;
            let a = spec.get(Param::A)?;
            let g = spec.get(Param::G)?;
            let b = -0.5 - 0.5 * (4.0 * g + 1.0).sqrt();
            (
                Prefactor {
                    r_power: l + 1.0,
                    factors: vec![PolyFactor {
                        c2: w,
                        c1: 0.0,
                        c0: w * a * a,
                        power: b + 1.0,
                    }],
                    gaussian: -w / 2.0,
                    linear: 0.0,
                    inverse_square: 0.0,
                    constant: 0.0,
                },
                VariableMap::ShiftedScaledSquare {
                    scale: w,
                    shift: w * a * a,
                },
            )
        }
        ModelKind::SoftCoreCoulomb => {
            let beta = spec.get(Param::Beta)?;
            let c = (spec.get(Param::Z)? - spec.get(Param::BigG)?) / (n + l + 2.0);
            (
                Prefactor {
                    r_power: l + 1.0,
                    factors: vec![PolyFactor {
                        c2: 0.0,
                        c1: 1.0,
                        c0: beta,
                        power: 1.0,
                    }],
                    gaussian: 0.0,
                    linear: -c,
                    inverse_square: 0.0,
                    constant: -c * beta,
                },
                VariableMap::Identity,
            )
        }
        ModelKind::NonPolynomial => {
            let w = spec.get(Param::Omega)?;
            let r = w / spec.get(Param::Delta)?;
            (
                Prefactor {
                    r_power: l + 1.0,
                    factors: vec![PolyFactor {
                        c2: w,
                        c1: 0.0,
                        c0: r,
                        power: 1.0,
                    }],
                    gaussian: -w / 2.0,
                    linear: 0.0,
                    inverse_square: 0.0,
                    constant: 0.0,
                },
                VariableMap::ShiftedScaledSquare { scale: w, shift: r },
            )
        }
    };
    Ok(RadialWavefunction {
        model: spec.clone(),
        prefactor,
        polynomial_roots: level.bethe.roots.clone(),
        variable_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bethe::SolverConfig;
    use crate::models::solve_level;

    fn level(kind: ModelKind, ell: i32, fixed: &[(Param, f64)], n: usize) -> Vec<QesLevel> {
        let spec = ModelSpec::partial(kind, ell, fixed).unwrap();
        solve_level(&spec, n, kind.default_free(), &SolverConfig::default()).unwrap()
    }

    #[test]
    fn isotonic_ground_state_shape() {
        let lv = level(
            ModelKind::Isotonic,
            0,
            &[(Param::Omega, 1.0), (Param::A, 1.0)],
            0,
        );
        let wf = wavefunction(&lv[0]).unwrap();
        assert!((wf.prefactor.factors[0].power + 4.0).abs() < 1e-12);
        for &r in &[0.3, 1.0, 2.7] {
            let expect: f64 = r * (r * r + 1.0f64).powi(-4) * (-r * r / 2.0).exp();
            assert!((wf.eval(r) / expect - 1.0).abs() < 1e-10);
        }
        assert!(wf.is_normalizable());
    }

    #[test]
    fn anharmonic_ground_state_nodeless() {
        let lv = level(
            ModelKind::Anharmonic,
            0,
            &[(Param::E, 2.0), (Param::D, 0.5)],
            0,
        );
        let wf = wavefunction(&lv[0]).unwrap();
        assert_eq!(wf.expected_nodes(), 0);
        let rs: Vec<f64> = (1..4000).map(|i| i as f64 * 1e-3).collect();
        assert!(wf.sample_scaled(&rs).iter().all(|&u| u >= 0.0));
        assert!(wf.is_normalizable());
    }

    #[test]
    fn soft_core_excited_state_single_node() {
        let lv = level(
            ModelKind::SoftCoreCoulomb,
            0,
            &[(Param::Beta, 1.0), (Param::BigG, 0.5)],
            1,
        );
        let excited: Vec<_> = lv.iter().filter(|l| l.bethe.roots[0] > 0.0).collect();
        assert!(!excited.is_empty());
        for l in excited {
            let wf = wavefunction(l).unwrap();
            assert_eq!(wf.expected_nodes(), 1);
            let tau = wf.node_radii()[0];
            assert!(wf.eval(0.5 * tau) * wf.eval(2.0 * tau) < 0.0);
            assert!(wf.is_normalizable());
        }
    }

    #[test]
    fn variable_map_inverse() {
        let m = VariableMap::ShiftedScaledSquare {
            scale: 2.0,
            shift: 1.0,
        };
        assert_eq!(m.radius_of(0.5), None);
        let r = m.radius_of(9.0).unwrap();
        assert!((m.apply(r) - 9.0).abs() < 1e-15);
        assert_eq!(VariableMap::Square.radius_of(-1.0), None);
        assert_eq!(VariableMap::Identity.radius_of(2.0), Some(2.0));
    }
}
