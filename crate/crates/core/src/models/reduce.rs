use super::{ModelKind, ModelSpec, Param, VariableMap};
use crate::basic_ode::BasicEquation;
use crate::bethe::{FamilyCoefficients, ParamRange, QesFamily};
use crate::scalar::Scalar;
use crate::Result;

/// Candidate constant term `b₀` of the soft-core reduction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SoftCoreB0 {
    /// `2(ℓ+1)β`, from substituting the prefactor into the radial equation.
    Derived,
    /// `2(ℓ+2)β`.
    TwoEllPlusTwo,
    /// `(ℓ+1)β`.
    EllPlusOne,
}

impl SoftCoreB0 {
    pub const ALL: [SoftCoreB0; 3] = [
        SoftCoreB0::Derived,
        SoftCoreB0::TwoEllPlusTwo,
        SoftCoreB0::EllPlusOne,
    ];

    pub fn label(self) -> &'static str {
        match self {
            SoftCoreB0::Derived => "2(l+1)beta",
            SoftCoreB0::TwoEllPlusTwo => "2(l+2)beta",
            SoftCoreB0::EllPlusOne => "(l+1)beta",
        }
    }

    fn value<T: Scalar>(self, ell: f64, beta: T) -> T {
        let k = match self {
            SoftCoreB0::Derived => 2.0 * (ell + 1.0),
            SoftCoreB0::TwoEllPlusTwo => 2.0 * (ell + 2.0),
            SoftCoreB0::EllPlusOne => ell + 1.0,
        };
        T::cst(k) * beta
    }
}

/// A model at fixed degree `n` with one parameter released: the map
/// `p ↦ (α, b₂, b₁, b₀, c₁, target c₀)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFamily {
    pub spec: ModelSpec,
    pub n: usize,
    pub free: Param,
    pub soft_core_b0: SoftCoreB0,
}

/// Build the coefficient family for `spec` at degree `n` with `free` released.
pub fn reduce(spec: &ModelSpec, n: usize, free: Param) -> Result<ModelFamily> {
    spec.validate(Some(free))?;
    Ok(ModelFamily {
        spec: spec.clone(),
        n,
        free,
        soft_core_b0: SoftCoreB0::Derived,
    })
}

impl ModelFamily {
    pub fn with_soft_core_b0(mut self, b0: SoftCoreB0) -> Self {
        self.soft_core_b0 = b0;
        self
    }

    fn value<T: Scalar>(&self, which: Param, p: T) -> T {
        if which == self.free {
            p
        } else {
            T::cst(self.spec.params.get(&which).copied().unwrap_or(f64::NAN))
        }
    }

    pub fn equation_at(&self, p: f64) -> Result<BasicEquation> {
        self.coefficients(p).equation()
    }

    /// Soft-core decay rate `c = (Z − G)/(n + ℓ + 2)`.
    pub fn soft_core_decay(&self, p: f64) -> f64 {
        let z = self.value(Param::Z, p);
        let g = self.value(Param::BigG, p);
        (z - g) / (self.n as f64 + self.spec.ell as f64 + 2.0)
    }

    /// The change of variable `t(r)` at parameter value `p`.
    pub fn variable_map(&self, p: f64) -> VariableMap {
        match self.spec.kind {
            ModelKind::Anharmonic => VariableMap::Square,
            ModelKind::SoftCoreCoulomb => VariableMap::Identity,
            ModelKind::Isotonic => {
                let w = self.value(Param::Omega, p);
                let a = self.value(Param::A, p);
                VariableMap::ShiftedScaledSquare {
                    scale: w,
                    shift: w * a * a,
                }
            }
            ModelKind::NonPolynomial => {
                let w = self.value(Param::Omega, p);
                let d = self.value(Param::Delta, p);
                VariableMap::ShiftedScaledSquare {
                    scale: w,
                    shift: w / d,
                }
            }
        }
    }
}

impl QesFamily for ModelFamily {
    fn coefficients<T: Scalar>(&self, p: T) -> FamilyCoefficients<T> {
        let c = T::cst;
        let nf = self.n as f64;
        let l = self.spec.ell as f64;
        match self.spec.kind {
            ModelKind::Anharmonic => {
                let w = self.value(Param::Omega, p);
                let e = self.value(Param::E, p);
                let d = self.value(Param::D, p);
                let s = (c(2.0) * d).sqrt();
                let u = e / s;
                let energy = w * (c(2.0 * nf + 2.0) + u);
                FamilyCoefficients {
                    alpha: c(0.0),
                    b2: -w,
                    b1: c(2.0) + u,
                    b0: s,
                    c1: (energy - w * (c(2.0) + u)) / c(2.0),
                    target_c0: (c(2.0) * w * s + c((l + 0.5) * (l + 0.5))
                        - (u + c(1.0)) * (u + c(1.0)))
                        / c(4.0),
                }
            }
            ModelKind::Isotonic => {
                let w = self.value(Param::Omega, p);
                let g = self.value(Param::G, p);
                let a = self.value(Param::A, p);
                let aa = w * a * a;
                let q = (c(4.0) * g + c(1.0)).sqrt();
                let energy = w * (c(2.0 * nf + l + 2.5) - q);
                FamilyCoefficients {
                    alpha: aa,
                    b2: c(-1.0),
                    b1: c(2.5 + l) - q + aa,
                    b0: aa * (q - c(1.0)),
                    c1: (energy / w + q - c(l + 2.5)) / c(2.0),
                    target_c0: -g / c(2.0) + (q - c(1.0)) * (c(l + 1.5) + aa) / c(2.0),
                }
            }
            ModelKind::SoftCoreCoulomb => {
                let z = self.value(Param::Z, p);
                let g = self.value(Param::BigG, p);
                let beta = self.value(Param::Beta, p);
                let k = (z - g) / c(nf + l + 2.0);
                FamilyCoefficients {
                    alpha: -beta,
                    b2: c(-2.0) * k,
                    b1: c(2.0) * (c(l + 2.0) - beta * k),
                    b0: self.soft_core_b0.value(l, beta),
                    c1: c(2.0) * (z - g - c(l + 2.0) * k),
                    target_c0: c(2.0) * (c(l + 1.0) * beta * k + beta * g - c(l + 1.0)),
                }
            }
            ModelKind::NonPolynomial => {
                let w = self.value(Param::Omega, p);
                let dl = self.value(Param::Delta, p);
                let lam = self.value(Param::Lambda, p);
                let r = w / dl;
                let energy = lam / dl + w * c(2.0 * nf + l + 3.5);
                FamilyCoefficients {
                    alpha: r,
                    b2: c(-1.0),
                    b1: r + c(l + 3.5),
                    b0: c(-2.0) * r,
                    c1: (energy / w - lam / (w * dl) - c(l + 3.5)) / c(2.0),
                    target_c0: -(lam / (c(2.0) * dl * dl) + r + c(l + 1.5)),
                }
            }
        }
    }

    fn search_range(&self) -> ParamRange {
        let nf = self.n as f64;
        let l = self.spec.ell as f64;
        let get = |q: Param| self.spec.params.get(&q).copied().unwrap_or(f64::NAN);
        match (self.spec.kind, self.free) {
            (ModelKind::Anharmonic, Param::D) => ParamRange::log(1e-6, 1e4),
            (ModelKind::Anharmonic, _) => ParamRange::log(1e-4, 1e5),
            (ModelKind::Isotonic, Param::G) => ParamRange::log(1e-6, 1e5),
            (ModelKind::Isotonic, _) => ParamRange::log(1e-4, 1e4),
            (ModelKind::SoftCoreCoulomb, Param::Z) => {
                let g = get(Param::BigG);
                let span = 1e3 * (1.0 + g.abs());
                ParamRange::log_above(g, g + 1e-6, g + span)
            }
            (ModelKind::SoftCoreCoulomb, Param::BigG) => {
                let z = get(Param::Z);
                let span = 1e3 * (1.0 + z.abs());
                ParamRange::linear(z - span, z - 1e-9)
            }
            (ModelKind::SoftCoreCoulomb, _) => ParamRange::log(1e-4, 1e4),
            (ModelKind::NonPolynomial, Param::Lambda) => {
                let r = get(Param::Omega) / get(Param::Delta);
                let dl = get(Param::Delta);
                let bound = (nf + 1.0) * (nf + r + l + 1.5) + nf * (nf + r + l + 4.0);
                let span = 2.0 * dl * dl * (2.0 * bound + 5.0);
                ParamRange::linear(-span, span)
            }
            (ModelKind::NonPolynomial, _) => ParamRange::log(1e-4, 1e4),
        }
    }

    fn admissible(&self, p: f64) -> bool {
        if !p.is_finite() {
            return false;
        }
        match (self.spec.kind, self.free) {
            (ModelKind::Anharmonic, Param::D) => p > 0.0,
            (ModelKind::Anharmonic, _) => true,
            (ModelKind::Isotonic, Param::G) => p > -0.25,
            (ModelKind::Isotonic, _) => p != 0.0,
            (ModelKind::SoftCoreCoulomb, Param::Beta) => p > 0.0,
            (ModelKind::SoftCoreCoulomb, _) => true,
            (ModelKind::NonPolynomial, Param::Lambda) => true,
            (ModelKind::NonPolynomial, _) => p != 0.0,
        }
    }
}

impl ModelSpec {
    /// Family at degree `n` with the model's default free parameter.
    pub fn family(&self, n: usize) -> Result<ModelFamily> {
        reduce(self, n, self.kind.default_free())
    }
}
