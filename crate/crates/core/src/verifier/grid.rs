use super::effective_potential;
use crate::models::{ModelKind, ModelSpec};
use crate::{QesError, Result};

/// Smallest number of interior nodes accepted.
pub const MIN_POINTS: usize = 200;
/// Largest number of interior nodes produced by [`default_grid`].
pub const MAX_DEFAULT_POINTS: usize = 400_000;
/// Decay exponent `∫κ dr` required beyond the outer turning point.
const WKB_TAIL: f64 = 25.0;
/// Grid points per inverse local wavenumber.
const POINTS_PER_WAVELENGTH: f64 = 200.0;

/// Treatment of the boundary nearest the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerBoundary {
    /// `u = 0` at `r_min`; nodes start at `r_min + h`.
    Dirichlet,
    /// Nodes start at `r_min`; the ghost value at `r_min − h` follows
    /// `u ∝ r^(ℓ+1)`.
    Regular { ell: i32 },
    /// Grid anchored at the origin with `u(0) = 0` for `ℓ ≥ 0`. For `ℓ = −1`
    /// nodes sit at half-integer multiples of `h` with an even reflection.
    Origin { ell: i32 },
}

/// Uniform grid with `num_points` unknowns and `u(r_max) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    pub r_min: f64,
    pub r_max: f64,
    pub num_points: usize,
    pub inner: InnerBoundary,
}

impl RadialGrid {
    pub fn new(r_min: f64, r_max: f64, num_points: usize, inner: InnerBoundary) -> Result<Self> {
        if matches!(inner, InnerBoundary::Origin { .. }) {
            return Err(QesError::Domain(
                "origin-anchored grids are built with RadialGrid::from_origin".into(),
            ));
        }
        if !(r_min > 0.0 && r_min < r_max && r_max.is_finite()) {
            return Err(QesError::Domain(format!(
                "grid needs 0 < r_min < r_max, got [{r_min}, {r_max}]"
            )));
        }
        Self::check_points(num_points)?;
        Ok(RadialGrid {
            r_min,
            r_max,
            num_points,
            inner,
        })
    }

    pub fn from_origin(r_max: f64, num_points: usize, ell: i32) -> Result<Self> {
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(QesError::Domain(format!(
                "grid needs r_max > 0, got {r_max}"
            )));
        }
        Self::check_points(num_points)?;
        let inner = InnerBoundary::Origin { ell };
        let h = r_max / (num_points as f64 + Self::origin_offset(ell));
        Ok(RadialGrid {
            r_min: Self::origin_offset(ell) * h,
            r_max,
            num_points,
            inner,
        })
    }

    fn check_points(num_points: usize) -> Result<()> {
        if num_points < MIN_POINTS {
            return Err(QesError::Domain(format!(
                "grid needs at least {MIN_POINTS} points, got {num_points}"
            )));
        }
        Ok(())
    }

    fn origin_offset(ell: i32) -> f64 {
        if ell >= 0 {
            1.0
        } else {
            0.5
        }
    }

    pub fn spacing(&self) -> f64 {
        let n = self.num_points as f64;
        match self.inner {
            InnerBoundary::Dirichlet => (self.r_max - self.r_min) / (n + 1.0),
            InnerBoundary::Regular { .. } => (self.r_max - self.r_min) / n,
            InnerBoundary::Origin { ell } => self.r_max / (n + Self::origin_offset(ell)),
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        let first = match self.inner {
            InnerBoundary::Dirichlet => self.r_min + h,
            InnerBoundary::Regular { .. } | InnerBoundary::Origin { .. } => self.r_min,
        };
        (0..self.num_points).map(|i| first + i as f64 * h).collect()
    }

    /// `u(ghost) / u(first node)` for the node left of the first unknown.
    pub fn ghost_ratio(&self) -> f64 {
        match self.inner {
            InnerBoundary::Dirichlet => 0.0,
            InnerBoundary::Regular { ell } => {
                ((self.r_min - self.spacing()) / self.r_min).powi(ell + 1)
            }
            InnerBoundary::Origin { ell } => {
                if ell >= 0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }

    /// Half the spacing on the same interval.
    pub fn refined(&self) -> RadialGrid {
        let n = self.num_points;
        match self.inner {
            InnerBoundary::Dirichlet => RadialGrid {
                num_points: 2 * n + 1,
                ..self.clone()
            },
            InnerBoundary::Regular { .. } => RadialGrid {
                num_points: 2 * n,
                ..self.clone()
            },
            InnerBoundary::Origin { ell } => {
                // Half-offset grids cannot keep r_max fixed; the outer wall
                // moves by h/4, deep in the decaying tail.
                let r_max = if ell >= 0 {
                    self.r_max
                } else {
                    self.r_max + 0.25 * self.spacing()
                };
                RadialGrid::from_origin(r_max, 2 * n + 1, ell).expect("refining a valid grid")
            }
        }
    }
}

/// Grid for locating an eigenvalue near `energy`.
///
/// The outer end lies where the WKB decay exponent past the last classical
/// turning point reaches 25. The spacing resolves the largest local
/// wavenumber in the allowed region. Anharmonic grids start inside the
/// `r⁻⁶` wall, where `V_eff > E + 1000` and `exp(−√(2d)/(2r²)) < 1e-14`;
/// the others are anchored at the origin.
pub fn default_grid(spec: &ModelSpec, energy: f64) -> Result<RadialGrid> {
    let v = effective_potential(spec)?;
    let vf = |r: f64| v.value(r);

    // Last sample with V ≤ E on a geometric scan.
    let mut r = 1e-4;
    let mut turning = None;
    let mut vmin = f64::INFINITY;
    let mut r_at_vmin = 1.0;
    while r < 1e5 {
        let x = vf(r);
        if x < vmin {
            vmin = x;
            r_at_vmin = r;
        }
        if x <= energy {
            turning = Some(r);
        }
        r *= 1.01;
    }
    let r_turn = turning.unwrap_or(r_at_vmin);

    let mut r_max = r_turn;
    let mut tail = 0.0;
    let step = 1e-3 * r_turn.max(1e-2);
    while tail < WKB_TAIL {
        let x = vf(r_max) - energy;
        tail += (2.0 * x.max(0.0)).sqrt() * step;
        r_max += step;
        if r_max > 1e6 {
            return Err(QesError::Domain(format!(
                "energy {energy} is not below the potential at large r"
            )));
        }
    }

    let (r_min, inner) = if spec.kind == ModelKind::Anharmonic {
        let s = (2.0 * spec.get(crate::models::Param::D)?).sqrt();
        let r_exp = (s / (2.0 * (1e14f64).ln())).sqrt();
        let (mut lo, mut hi) = (1e-8, r_at_vmin);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if vf(mid) > energy + 1e3 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo.min(r_exp), InnerBoundary::Dirichlet)
    } else {
        (0.0, InnerBoundary::Origin { ell: spec.ell })
    };

    let kmax = (2.0 * (energy - vmin).max(0.0))
        .sqrt()
        .max(1.0 / r_turn)
        .max(1.0);
    let h = 1.0 / (POINTS_PER_WAVELENGTH * kmax);
    let points =
        (((r_max - r_min) / h).ceil() as usize).clamp(MIN_POINTS.max(2000), MAX_DEFAULT_POINTS);
    match inner {
        InnerBoundary::Origin { ell } => RadialGrid::from_origin(r_max, points, ell),
        other => RadialGrid::new(r_min, r_max, points, other),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spacing_and_nodes() {
        let g = RadialGrid::new(1.0, 2.0, 999, InnerBoundary::Dirichlet).unwrap();
        assert!((g.spacing() - 1e-3).abs() < 1e-15);
        let nodes = g.nodes();
        assert!((nodes[0] - 1.001).abs() < 1e-12);
        assert!((nodes[998] - 1.999).abs() < 1e-12);
        let r = g.refined();
        assert!((r.spacing() - 5e-4).abs() < 1e-15);

        let o = RadialGrid::from_origin(10.0, 999, 0).unwrap();
        assert!((o.spacing() - 0.01).abs() < 1e-15);
        assert!((o.nodes()[0] - 0.01).abs() < 1e-15);
        assert_eq!(o.ghost_ratio(), 0.0);
        assert!((o.refined().spacing() - 0.005).abs() < 1e-15);

        let half = RadialGrid::from_origin(10.0, 1000, -1).unwrap();
        assert!((half.nodes()[0] - 0.5 * half.spacing()).abs() < 1e-15);
        assert_eq!(half.ghost_ratio(), 1.0);
        assert!((half.refined().spacing() - 0.5 * half.spacing()).abs() < 1e-15);
    }

    #[test]
    fn regular_ghost_is_linear_for_s_waves() {
        let g = RadialGrid::new(1e-3, 12.0, 4000, InnerBoundary::Regular { ell: 0 }).unwrap();
        let h = g.spacing();
        assert!((g.ghost_ratio() - (1e-3 - h) / 1e-3).abs() < 1e-12);
    }

    #[test]
    fn invalid_grids() {
        assert!(RadialGrid::new(0.0, 1.0, 500, InnerBoundary::Dirichlet).is_err());
        assert!(RadialGrid::new(2.0, 1.0, 500, InnerBoundary::Dirichlet).is_err());
        assert!(RadialGrid::new(0.1, 1.0, 100, InnerBoundary::Dirichlet).is_err());
    }

    #[test]
    fn anharmonic_wall_placement() {
        let spec = ModelSpec::new(
            ModelKind::Anharmonic,
            0,
            &[
                (crate::models::Param::Omega, 4.375),
                (crate::models::Param::E, 2.0),
                (crate::models::Param::D, 0.5),
            ],
        )
        .unwrap();
        let g = default_grid(&spec, 17.5).unwrap();
        let v = effective_potential(&spec).unwrap();
        assert!(v.eval(g.r_min).unwrap() > 17.5 + 1e3);
        assert!((-1.0 / (2.0 * g.r_min * g.r_min)).exp() < 1e-14);
    }
}
