//! Spherical Fourier analysis on split-rank-one semisimple symmetric spaces.
//!
//! Everything is driven by the root multiplicities of the space: the
//! Eisenstein integrals, the Harish-Chandra series, the discrete-spectrum
//! functions, the Fourier transform with its inversion formula, and the
//! Schwartz seminorms on both sides of the transform.

pub mod eigenfunctions;
pub mod error;
pub mod numerics;
pub mod parallel;
pub mod schwartz;
pub mod spaces;
pub mod transform;

pub use error::{Error, Result};
pub use spaces::{derive_geometry, MultiplicityDatum, PoleSet, PolynomialSpec, SpaceGeometry};
