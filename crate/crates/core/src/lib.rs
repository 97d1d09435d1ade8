//! Direct scattering of a plane wave by a Dirichlet periodic grating.
//!
//! The incident trace on one period of the boundary is fitted in the least
//! squares sense by outgoing quasiperiodic solutions: half-space Green's
//! functions with poles below the surface, or Rayleigh modes. The fitted
//! expansion is the scattered field everywhere above the boundary.

pub mod error;
pub mod geometry;
pub mod greens;
pub mod modes;
pub mod solver;

pub use error::{MrcError, Result};
pub mod cli;
pub mod config;
pub mod format;
pub mod validation;
