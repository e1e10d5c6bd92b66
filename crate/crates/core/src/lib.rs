//! Discontinuous Galerkin (P1, Taylor basis) solvers for two-dimensional
//! scalar conservation laws on structured quadrilateral meshes.
//!
//! Cell averages are kept inside local bounds by flux limiting (localized
//! FCT or monolithic convex limiting), slopes are controlled by one of
//! several slope limiters, and nonlinear problems can be entropy stabilized.
//! The [`timestep`] module ties the pieces together in an SSP-RK3 stepper.

pub mod analysis;
pub mod cli;
pub mod dgfield;
pub mod entropy;
pub mod error;
pub mod fluxes;
pub mod limiters;
pub mod mesh;
pub mod problems;
pub mod timestep;

pub use error::{Error, Result};
