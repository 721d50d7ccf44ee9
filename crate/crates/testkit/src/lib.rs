//! Oracles that share no code with the library under test: double-exponential
//! quadrature of the planar (d = 2) cell law and a few statistics helpers.

pub mod quad;
pub mod stats;
