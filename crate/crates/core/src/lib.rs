//! Elasticity of smectic-A liquid crystals.
//!
//! Layers are level sets `Phi = n a` of a phase field. The crate provides
//! grid fields and level-set geometry, closed-form dislocation solutions, a
//! Fourier solver for the linearized theory, the nonlinear energy and its
//! square-completed decomposition, a Lagrangian layer-flow integrator and
//! Burgers circuits.

pub mod analytic;
pub mod contour;
pub mod energy;
pub mod error;
pub mod export;
pub mod fd;
pub mod flow;
pub mod geometry;
pub mod grid;
pub mod similarity;
pub mod spectral;
pub mod topology;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{GridSpec, MaterialParams, ScalarField3, VectorField3};
