//! Numerical workbench for axially symmetric one-phase free boundaries obtained as
//! limits of phase-field mountain-pass solutions on a cylinder.
//!
//! The pipeline: a regularized double-well potential and its heteroclinic profile
//! ([`potential`]), a finite-volume discretization of the cylinder ([`grid`]), the
//! energy-decreasing parabolic flow ([`flow`]), monotone paths and the minimax level
//! ([`mountainpass`]), catenoid geometry ([`catenoid`]) and free-boundary
//! post-processing ([`freeboundary`]). [`pipeline`] runs the whole sequence from a
//! config file.

pub mod catenoid;
pub mod error;
pub mod flow;
pub mod freeboundary;
pub mod grid;
pub mod mountainpass;
pub mod pipeline;
pub mod potential;
pub mod quad;

pub use error::{Error, Result};
