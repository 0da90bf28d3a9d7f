//! Density-evolution analysis of nonbinary LDPC and SC-LDPC ensembles on the
//! binary erasure channel.
//!
//! Messages exchanged by a belief-propagation decoder for a code with edge
//! labels drawn from GL(2^m) are, on the BEC, always equiprobable over a
//! subspace of GF(2)^m. Density evolution therefore tracks a probability
//! vector over the subspace dimensions 0..=m. This crate provides:
//!
//! - exact (rational) computation of the variable-node and check-node
//!   convolution coefficient tensors, with a brute-force subspace oracle
//!   ([`gf_coeffs`]);
//! - the density algebra: entropy, VN/CN convolutions, degree-polynomial
//!   convolutions, channel densities, and the degradation partial order
//!   ([`density`]);
//! - the uncoupled DE recursion, BP threshold, potential function, energy
//!   gap, and potential threshold ([`de_uncoupled`]);
//! - the spatially coupled chain: coupled DE, coupled fixed points, coupled
//!   potential, shift bound, middle-point analysis, and the coupled BP
//!   threshold ([`de_coupled`]);
//! - a runnable suite of identity and monotonicity checks ([`checks`]).
//!
//! # Example
//!
//! ```
//! use nbde::de_uncoupled::{bp_threshold, DegreeDistribution, SolverOptions};
//! use nbde::gf_coeffs::CoefficientTable;
//!
//! let table = CoefficientTable::shared(1)?;
//! let dd = DegreeDistribution::regular(3, 6)?;
//! let eps_bp = bp_threshold(&dd, &table, &SolverOptions::default());
//! assert!((eps_bp - 0.4294).abs() < 5e-4);
//! # Ok::<(), nbde::Error>(())
//! ```

pub mod checks;
pub mod de_coupled;
pub mod de_uncoupled;
pub mod density;
pub mod gf_coeffs;
pub mod tol;

mod error;

pub use error::Error;

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
