//! Finite-difference eigensolver for `−½u″ + V_eff(r)u = Eu` on a uniform
//! radial grid, used to confirm solved energies and node counts.

mod grid;
mod tridiag;

pub use grid::{default_grid, InnerBoundary, RadialGrid, MIN_POINTS};

use crate::models::{ModelKind, ModelSpec};
use crate::{QesError, Result};

/// Default-grid matching tolerance is `max(ENERGY_ATOL, ENERGY_RTOL·|E|)`.
pub const ENERGY_ATOL: f64 = 1e-4;
pub const ENERGY_RTOL: f64 = 1e-4;
/// Tolerance after one Richardson refinement.
pub const REFINED_ATOL: f64 = 1e-5;
/// Values below this fraction of `max|u|` are ignored when counting nodes.
pub const NODE_NOISE_FLOOR: f64 = 1e-10;

/// `V_eff(r)`, half the bracket of the radial equation `u″ = [·]u − 2Eu`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectivePotential {
    kind: ModelKind,
    ell: f64,
    p: [f64; 3],
}

/// The effective potential of a fully parametrised model.
pub fn effective_potential(spec: &ModelSpec) -> Result<EffectivePotential> {
    spec.validate(None)?;
    let ps = spec.kind.params();
    Ok(EffectivePotential {
        kind: spec.kind,
        ell: spec.ell as f64,
        p: [spec.get(ps[0])?, spec.get(ps[1])?, spec.get(ps[2])?],
    })
}

impl EffectivePotential {
    pub fn eval(&self, r: f64) -> Result<f64> {
        if !(r > 0.0) {
            return Err(QesError::Domain(format!(
                "effective potential needs r > 0, got {r}"
            )));
        }
        Ok(self.value(r))
    }

    pub(crate) fn value(&self, r: f64) -> f64 {
        let l = self.ell;
        let r2 = r * r;
        let centrifugal = l * (l + 1.0) / r2;
        let bracket = match self.kind {
            ModelKind::Anharmonic => {
                let [w, e, d] = self.p;
                centrifugal + w * w * r2 + 2.0 * e / (r2 * r2) + 2.0 * d / (r2 * r2 * r2)
            }
            ModelKind::Isotonic => {
                let [w, g, a] = self.p;
                let a2 = a * a;
                centrifugal + w * w * r2 + 2.0 * g * (r2 - a2) / ((r2 + a2) * (r2 + a2))
            }
            ModelKind::SoftCoreCoulomb => {
                let [big_g, z, beta] = self.p;
                centrifugal + 2.0 * big_g / r - 2.0 * z / (r + beta)
            }
            ModelKind::NonPolynomial => {
                let [w, dl, lam] = self.p;
                centrifugal + w * w * r2 + 2.0 * lam * r2 / (1.0 + dl * r2)
            }
        };
        0.5 * bracket
    }

    pub fn kind(&self) -> ModelKind {
        self.kind
    }
}

/// Lowest eigenpairs of the discretised radial operator.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Values on `grid.nodes()`, unit norm under the trapezoid rule.
    pub eigenvectors: Vec<Vec<f64>>,
    pub grid: RadialGrid,
}

/// Lowest `m` eigenpairs of the three-point discretisation on `grid`.
pub fn fd_spectrum(spec: &ModelSpec, grid: &RadialGrid, m: usize) -> Result<FdSpectrum> {
    let v = effective_potential(spec)?;
    let nodes = grid.nodes();
    let h = grid.spacing();
    let m = m.min(nodes.len());
    let kin = 1.0 / (h * h);
    let mut diag: Vec<f64> = nodes.iter().map(|&r| kin + v.value(r)).collect();
    diag[0] -= 0.5 * kin * grid.ghost_ratio();
    let off = -0.5 * kin;
    if diag.iter().any(|d| !d.is_finite()) {
        return Err(QesError::Eigen(format!(
            "non-finite potential on grid starting at r = {}",
            nodes[0]
        )));
    }
    let t = tridiag::SymTridiagonal::new(diag, off);
    let eigenvalues = t.lowest_eigenvalues(m);
    let mut eigenvectors: Vec<Vec<f64>> = Vec::with_capacity(m);
    for &lambda in &eigenvalues {
        let mut u = t.eigenvector(lambda).ok_or_else(|| {
            QesError::Eigen(format!("inverse iteration failed at eigenvalue {lambda}"))
        })?;
        for prev in &eigenvectors {
            let dot: f64 = u.iter().zip(prev).map(|(a, b)| a * b).sum::<f64>() * h;
            u.iter_mut().zip(prev).for_each(|(a, b)| *a -= dot * b);
        }
        let norm = (u.iter().map(|x| x * x).sum::<f64>() * h).sqrt();
        if !(norm > 0.0) {
            return Err(QesError::Eigen(format!("null eigenvector at {lambda}")));
        }
        let sign = if u
            .iter()
            .find(|x| x.abs() > 1e-8 * norm)
            .copied()
            .unwrap_or(1.0)
            < 0.0
        {
            -1.0
        } else {
            1.0
        };
        u.iter_mut().for_each(|x| *x *= sign / norm);
        eigenvectors.push(u);
    }
    Ok(FdSpectrum {
        eigenvalues,
        eigenvectors,
        grid: grid.clone(),
    })
}

/// Strict sign changes of `u`, ignoring entries below the noise floor.
pub fn count_nodes(u: &[f64]) -> usize {
    let max = u.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let floor = NODE_NOISE_FLOOR * max;
    let mut last = 0.0_f64;
    let mut count = 0;
    for &x in u {
        if x.abs() <= floor {
            continue;
        }
        if last != 0.0 && x.signum() != last.signum() {
            count += 1;
        }
        last = x;
    }
    count
}

/// Outcome of checking an energy against the finite-difference spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct FdCheck {
    pub energy: f64,
    /// Closest eigenvalue on the default grid.
    pub fd_energy: f64,
    pub level_index: usize,
    pub deviation: f64,
    /// Richardson extrapolation from the default and half-spacing grids.
    pub richardson_energy: f64,
    pub refined_deviation: f64,
    pub node_count: usize,
    pub num_points: usize,
}

impl FdCheck {
    pub fn tolerance(&self) -> f64 {
        ENERGY_ATOL.max(ENERGY_RTOL * self.energy.abs())
    }

    pub fn passed(&self) -> bool {
        self.deviation <= self.tolerance() && self.refined_deviation <= REFINED_ATOL
    }
}

/// Locate `energy` in the spectrum of `spec`, searching the lowest
/// `expected_index + 4` levels.
pub fn verify_energy(spec: &ModelSpec, energy: f64, expected_index: usize) -> Result<FdCheck> {
    let grid = default_grid(spec, energy)?;
    verify_energy_on(spec, energy, expected_index, &grid)
}

pub fn verify_energy_on(
    spec: &ModelSpec,
    energy: f64,
    expected_index: usize,
    grid: &RadialGrid,
) -> Result<FdCheck> {
    let m = expected_index + 4;
    let coarse = fd_spectrum(spec, grid, m)?;
    let (idx, &fd_energy) = coarse
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - energy).abs().total_cmp(&(b.1 - energy).abs()))
        .ok_or_else(|| QesError::Eigen("empty spectrum".into()))?;
    let fine = fd_spectrum(spec, &grid.refined(), idx + 1)?;
    let richardson_energy = (4.0 * fine.eigenvalues[idx] - fd_energy) / 3.0;
    Ok(FdCheck {
        energy,
        fd_energy,
        level_index: idx,
        deviation: (fd_energy - energy).abs(),
        richardson_energy,
        refined_deviation: (richardson_energy - energy).abs(),
        node_count: count_nodes(&coarse.eigenvectors[idx]),
        num_points: grid.num_points,
    })
}
