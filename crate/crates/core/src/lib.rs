//! Eigenvalue counting for the Robin Laplacian on cusp-shaped domains
//! `{x > a, |y| < f(x)}`.
//!
//! Two exact counting routes are provided: a mode sum of one-dimensional
//! Schrödinger operators ([`schrodinger1d`]) and a direct finite element
//! count on the mapped strip ([`laplace2d`]). Both reduce to Sylvester
//! inertia, so each count is an integer computed without eigensolves.
//! [`asymptotics`] supplies the closed-form growth laws they are compared
//! against.

pub mod asymptotics;
pub mod band;
pub mod count;
pub mod error;
pub mod laplace2d;
pub mod profiles;
pub mod quad;
pub mod schrodinger1d;
pub mod transverse;

pub use count::{CountMethod, CountResult, Discretization};
pub use error::{Error, Result};
pub use profiles::{BoundaryCoefficient, CuspProfile};
