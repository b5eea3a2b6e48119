//! Linear stability of the elliptic Lagrangian (equilateral triangle)
//! solutions of the planar three-body problem.
//!
//! The essential part of the linearized flow depends on the mass parameter
//! `beta` in `[0, 9]` and the eccentricity `e`. This crate integrates the
//! fundamental solution, classifies the monodromy spectrum, computes
//! omega-Maslov indices by two independent routes (a crossing count along
//! the symplectic path and a Morse index of a truncated Sturm-Liouville
//! operator) and traces the degeneracy curves in the `(beta, e)` plane.

pub mod curves;
pub mod error;
pub mod fourier;
pub mod index;
pub mod model;
pub mod monodromy;
pub mod ode;
pub mod spectral;
pub mod symplectic;

pub use error::{Error, Result};
pub use model::Params;

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
