//! The four radial potentials, their reduction to the basic equation, and
//! the map from solved Bethe roots back to energies, allowed couplings and
//! wavefunctions.
//!
//! Radial equations are written as `−½u″ + V_eff(r)u = Eu` with
//!
//! | model | `2·V_eff(r)` |
//! |---|---|
//! | anharmonic | `ℓ(ℓ+1)/r² + ω²r² + 2e/r⁴ + 2d/r⁶` |
//! | isotonic | `ℓ(ℓ+1)/r² + ω²r² + 2g(r²−a²)/(r²+a²)²` |
//! | soft-core Coulomb | `ℓ(ℓ+1)/r² + 2G/r − 2Z/(r+β)` |
//! | non-polynomial | `ℓ(ℓ+1)/r² + ω²r² + 2λr²/(1+δr²)` |

mod arbitration;
mod closed_form;
mod reduce;
mod wavefunction;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use arbitration::{soft_core_arbitration, ArbitratedLevel, ArbitrationReport, VariantOutcome};
pub use closed_form::{closed_form, first_root_branches, ClosedFormLevel};
pub use reduce::{reduce, ModelFamily, SoftCoreB0};
pub use wavefunction::{wavefunction, PolyFactor, Prefactor, RadialWavefunction, VariableMap};

use crate::bethe::{solve_joint, BetheSolution, SolverConfig};
use crate::oracle;
use crate::{QesError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    Anharmonic,
    Isotonic,
    SoftCoreCoulomb,
    NonPolynomial,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [
        ModelKind::Anharmonic,
        ModelKind::Isotonic,
        ModelKind::SoftCoreCoulomb,
        ModelKind::NonPolynomial,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Anharmonic => "anharmonic",
            ModelKind::Isotonic => "isotonic",
            ModelKind::SoftCoreCoulomb => "soft-core-coulomb",
            ModelKind::NonPolynomial => "non-polynomial",
        }
    }

    pub fn params(self) -> &'static [Param] {
        match self {
            ModelKind::Anharmonic => &[Param::Omega, Param::E, Param::D],
            ModelKind::Isotonic => &[Param::Omega, Param::G, Param::A],
            ModelKind::SoftCoreCoulomb => &[Param::BigG, Param::Z, Param::Beta],
            ModelKind::NonPolynomial => &[Param::Omega, Param::Delta, Param::Lambda],
        }
    }

    /// Parameter solved for when none is named.
    pub fn default_free(self) -> Param {
        match self {
            ModelKind::Anharmonic => Param::Omega,
            ModelKind::Isotonic => Param::G,
            ModelKind::SoftCoreCoulomb => Param::Z,
            ModelKind::NonPolynomial => Param::Lambda,
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = QesError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "anharmonic" => Ok(ModelKind::Anharmonic),
            "isotonic" => Ok(ModelKind::Isotonic),
            "soft-core-coulomb" | "soft-core" | "softcore" | "softcorecoulomb" => {
                Ok(ModelKind::SoftCoreCoulomb)
            }
            "non-polynomial" | "nonpolynomial" => Ok(ModelKind::NonPolynomial),
            other => Err(QesError::InvalidModel(format!("unknown model `{other}`"))),
        }
    }
}

/// Physical parameter names. `G` and `g` are distinct.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Param {
    #[serde(rename = "omega")]
    Omega,
    #[serde(rename = "e")]
    E,
    #[serde(rename = "d")]
    D,
    #[serde(rename = "g")]
    G,
    #[serde(rename = "a")]
    A,
    #[serde(rename = "G")]
    BigG,
    #[serde(rename = "Z")]
    Z,
    #[serde(rename = "beta")]
    Beta,
    #[serde(rename = "delta")]
    Delta,
    #[serde(rename = "lambda")]
    Lambda,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Omega => "omega",
            Param::E => "e",
            Param::D => "d",
            Param::G => "g",
            Param::A => "a",
            Param::BigG => "G",
            Param::Z => "Z",
            Param::Beta => "beta",
            Param::Delta => "delta",
            Param::Lambda => "lambda",
        }
    }
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Param {
    type Err = QesError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "omega" | "w" => Param::Omega,
            "e" => Param::E,
            "d" => Param::D,
            "g" => Param::G,
            "a" => Param::A,
            "G" => Param::BigG,
            "Z" | "z" => Param::Z,
            "beta" => Param::Beta,
            "delta" => Param::Delta,
            "lambda" => Param::Lambda,
            other => {
                return Err(QesError::UnknownParameter {
                    model: "any model".into(),
                    name: other.into(),
                })
            }
        })
    }
}

/// A potential, its parameters and the angular momentum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub params: BTreeMap<Param, f64>,
    pub ell: i32,
}

impl ModelSpec {
    /// Fully parametrised model; every parameter must be present and valid.
    pub fn new(kind: ModelKind, ell: i32, params: &[(Param, f64)]) -> Result<Self> {
        let spec = Self::partial(kind, ell, params)?;
        spec.validate(None)?;
        Ok(spec)
    }

    /// Model whose free parameter may still be missing.
    pub fn partial(kind: ModelKind, ell: i32, params: &[(Param, f64)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(p, v) in params {
            if !kind.params().contains(&p) {
                return Err(QesError::UnknownParameter {
                    model: kind.name().into(),
                    name: p.name().into(),
                });
            }
            map.insert(p, v);
        }
        Ok(ModelSpec {
            kind,
            params: map,
            ell,
        })
    }

    pub fn get(&self, p: Param) -> Result<f64> {
        self.params.get(&p).copied().ok_or_else(|| {
            QesError::InvalidModel(format!("{} requires parameter `{p}`", self.kind))
        })
    }

    pub fn with_param(&self, p: Param, v: f64) -> Self {
        let mut out = self.clone();
        out.params.insert(p, v);
        out
    }

    /// `ℓ = −1` is accepted but noted in results.
    pub fn ell_flagged(&self) -> bool {
        self.ell == -1
    }

    /// Check every parameter except `free`, which may be absent.
    pub fn validate(&self, free: Option<Param>) -> Result<()> {
        if self.ell < -1 {
            return Err(QesError::InvalidModel(format!(
                "angular momentum must be >= -1, got {}",
                self.ell
            )));
        }
        if let Some(f) = free {
            if !self.kind.params().contains(&f) {
                return Err(QesError::UnknownParameter {
                    model: self.kind.name().into(),
                    name: f.name().into(),
                });
            }
        }
        for (p, v) in &self.params {
            if !v.is_finite() {
                return Err(QesError::InvalidModel(format!("`{p}` = {v} is not finite")));
            }
        }
        let fixed = |p: Param| -> Result<Option<f64>> {
            if Some(p) == free {
                Ok(self.params.get(&p).copied())
            } else {
                self.get(p).map(Some)
            }
        };
        let positive = |p: Param| -> Result<()> {
            match fixed(p)? {
                Some(v) if v <= 0.0 && Some(p) != free => Err(QesError::InvalidModel(format!(
                    "{} requires {p} > 0, got {v}",
                    self.kind
                ))),
                _ => Ok(()),
            }
        };
        match self.kind {
            ModelKind::Anharmonic => {
                positive(Param::Omega)?;
                positive(Param::E)?;
                positive(Param::D)?;
            }
            ModelKind::Isotonic => {
                positive(Param::Omega)?;
                fixed(Param::A)?;
                if let Some(g) = fixed(Param::G)? {
                    if g < 0.0 && free != Some(Param::G) {
                        return Err(QesError::InvalidModel(format!(
                            "isotonic requires g >= 0, got {g}"
                        )));
                    }
                }
            }
            ModelKind::SoftCoreCoulomb => {
                positive(Param::Beta)?;
                let g = fixed(Param::BigG)?;
                let z = fixed(Param::Z)?;
                if let (Some(g), Some(z)) = (g, z) {
                    if g == z && free.is_none() {
                        return Err(QesError::InvalidModel("soft-core requires Z != G".into()));
                    }
                }
            }
            ModelKind::NonPolynomial => {
                positive(Param::Omega)?;
                positive(Param::Delta)?;
                fixed(Param::Lambda)?;
            }
        }
        Ok(())
    }
}

/// Energy of the degree-`n` level, fixed by `c₁ = −n·b₂`.
pub fn energy_of(spec: &ModelSpec, n: usize) -> Result<f64> {
    spec.validate(None)?;
    let nf = n as f64;
    let l = spec.ell as f64;
    Ok(match spec.kind {
        ModelKind::Anharmonic => {
            let (w, e, d) = (
                spec.get(Param::Omega)?,
                spec.get(Param::E)?,
                spec.get(Param::D)?,
            );
            w * (2.0 * nf + 2.0 + e / (2.0 * d).sqrt())
        }
        ModelKind::Isotonic => {
            let (w, g) = (spec.get(Param::Omega)?, spec.get(Param::G)?);
            w * (2.0 * nf + l + 2.5 - (4.0 * g + 1.0).sqrt())
        }
        ModelKind::SoftCoreCoulomb => {
            let c = (spec.get(Param::Z)? - spec.get(Param::BigG)?) / (nf + l + 2.0);
            -0.5 * c * c
        }
        ModelKind::NonPolynomial => {
            let (w, dl, lam) = (
                spec.get(Param::Omega)?,
                spec.get(Param::Delta)?,
                spec.get(Param::Lambda)?,
            );
            lam / dl + w * (2.0 * nf + l + 3.5)
        }
    })
}

/// One exactly solved level.
#[derive(Debug, Clone, PartialEq)]
pub struct QesLevel {
    /// Model with the free parameter filled in.
    pub model: ModelSpec,
    pub n: usize,
    pub energy: f64,
    pub bethe: BetheSolution,
    pub free_param: Param,
    pub free_param_value: f64,
    /// Degree-`n` polynomial in `t`, ascending, monic.
    pub poly_coeffs: Vec<f64>,
    /// `c₀(roots, p) − target c₀(p)`.
    pub constraint_residual: f64,
    /// Distance from `c₀` to the nearest real eigenvalue of the invariant matrix.
    pub oracle_c0_deviation: f64,
    /// Roots mapping to a positive radius, i.e. radial nodes.
    pub node_roots: usize,
    pub notes: Vec<String>,
}

/// Solve for all degree-`n` levels with `free` released.
///
/// Soft-core solutions with a non-decaying exponential (`c ≤ 0`) are
/// dropped; if nothing else remains this is reported as an error.
pub fn solve_level(
    spec: &ModelSpec,
    n: usize,
    free: Param,
    cfg: &SolverConfig,
) -> Result<Vec<QesLevel>> {
    solve_level_with(spec, n, free, SoftCoreB0::Derived, cfg)
}

pub(crate) fn solve_level_with(
    spec: &ModelSpec,
    n: usize,
    free: Param,
    b0: SoftCoreB0,
    cfg: &SolverConfig,
) -> Result<Vec<QesLevel>> {
    let family = reduce(spec, n, free)?.with_soft_core_b0(b0);
    let joint = solve_joint(&family, n, cfg)?;
    let mut out = Vec::new();
    let mut rejected = Vec::new();
    for js in joint {
        let model = spec.with_param(free, js.param);
        if model.validate(None).is_err() {
            rejected.push(format!("{free} = {} violates the model domain", js.param));
            continue;
        }
        if model.kind == ModelKind::SoftCoreCoulomb {
            let c = family.soft_core_decay(js.param);
            if c <= 0.0 {
                rejected.push(format!("{free} = {}: decay rate c = {c} <= 0", js.param));
                continue;
            }
        }
        let eq = family.equation_at(js.param)?;
        let oracle_c0_deviation = oracle::oracle_solutions(&eq, n)?
            .iter()
            .filter(|l| l.has_real_c0())
            .map(|l| (l.c0.re - js.solution.c0).abs())
            .fold(f64::INFINITY, f64::min);
        let map = family.variable_map(js.param);
        let node_roots = js
            .solution
            .roots
            .iter()
            .filter(|&&t| map.radius_of(t).is_some())
            .count();
        let mut notes = Vec::new();
        if model.ell_flagged() {
            notes.push("ell = -1: r^(ell+1) prefactor is constant".into());
        }
        out.push(QesLevel {
            energy: energy_of(&model, n)?,
            poly_coeffs: crate::Polynomial::from_roots(&js.solution.roots)
                .coeffs()
                .to_vec(),
            bethe: js.solution,
            free_param: free,
            free_param_value: js.param,
            constraint_residual: js.constraint_residual,
            oracle_c0_deviation,
            node_roots,
            model,
            n,
            notes,
        });
    }
    if out.is_empty() && !rejected.is_empty() {
        return Err(QesError::NoRealLevel(rejected.join("; ")));
    }
    out.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    Ok(out)
}
