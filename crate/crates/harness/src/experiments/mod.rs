//! One function per experiment. Monte Carlo experiments draw through
//! [`crate::parallel`]; the deterministic ones evaluate model formulas only.

mod analytic;
mod clt;
mod kendall;
mod moments;
mod tails;
mod tessellate;

pub use analytic::{run_cumulant_sweep, run_ldp, run_modphi};
pub use clt::run_clt;
pub use kendall::run_kendall;
pub use moments::run_moment_check;
pub use tails::{run_lower_tail, run_upper_tail, LOWER_FIT_POINTS};
pub use tessellate::{brute_force_regular_triangles, run_tessellation_check};

/// Fewest effective samples behind any grid point that enters a verdict.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 200.0;
