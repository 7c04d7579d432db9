//! Quasi-exactly solvable radial Schrödinger models.
//!
//! Four radial potentials (singular anharmonic, generalized isotonic
//! oscillator, soft-core Coulomb and the non-polynomially modified
//! oscillator) are reduced to one second-order equation
//!
//! ```text
//! t(t-α) S'' + (b₂t² + b₁t + b₀) S' + c₁ t S = c₀ S
//! ```
//!
//! whose degree-`n` polynomial solutions are found by solving the Bethe
//! ansatz equations for their roots. Every result can be cross-checked by
//! two independent routes: diagonalisation of the operator on the
//! invariant polynomial subspace ([`oracle`]) and a finite-difference
//! eigensolver for the original radial equation ([`verifier`]).

pub mod basic_ode;
pub mod bethe;
pub mod driver;
mod error;
pub mod models;
pub mod oracle;
pub mod scalar;
pub mod sl2;
pub mod verifier;

pub use basic_ode::{BasicEquation, GsweParams, Polynomial};
pub use bethe::{BetheSolution, SolverConfig};
pub use error::{QesError, Result};
pub use models::{ModelKind, ModelSpec, Param, QesLevel};
