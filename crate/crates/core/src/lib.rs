//! Simulation and exact evaluation toolkit for beta-Delaunay tessellations.
//!
//! * [`specfun`]: log-gamma, polygamma and Barnes G on the positive reals.
//! * [`model`]: parameter validation, exact volume moments, cumulants and
//!   the high-dimensional limit quantities of the log-volume.
//! * [`geometry`]: simplex volume, circumsphere and shape distances.
//! * [`sampler`]: exact sampling of the weighted typical cell.
//! * [`tessellation`]: planar (and 1-D) beta-Delaunay construction from
//!   Poisson input, with ergodic moment estimates.

pub mod error;
pub mod geometry;
pub mod model;
pub mod sampler;
pub mod specfun;
pub mod tessellation;

pub use error::{Error, Result};
