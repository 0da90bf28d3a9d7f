//! Default tolerances shared across the crate.
//!
//! All of these can be overridden per run through the solver option
//! structs; the constants here are the single source for the defaults.

/// Tolerance on tail-sum comparisons in the degradation partial order.
/// Strict ordering additionally requires a margin larger than this.
pub const ORDER_TOL: f64 = 1e-12;

/// Probability mass drift (|sum - 1|) above which a density is rescaled.
pub const MASS_DRIFT_TOL: f64 = 1e-12;

/// L-infinity convergence tolerance for fixed-point iteration.
pub const FP_TOL: f64 = 1e-10;

/// Entropy below which a fixed point counts as fully decoded.
pub const H_ZERO_TOL: f64 = 1e-7;

/// Bracket width at which threshold bisections stop.
pub const EPS_TOL: f64 = 1e-4;

/// L-infinity distance below which two fixed points are considered equal.
pub const FP_DEDUP_TOL: f64 = 1e-8;

/// Iteration cap for the uncoupled DE recursion.
pub const MAX_ITER_UNCOUPLED: usize = 100_000;

/// Iteration cap for coupled DE sweeps.
pub const MAX_ITER_COUPLED: usize = 1_000_000;
