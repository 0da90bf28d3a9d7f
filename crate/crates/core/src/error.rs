use thiserror::Error;

/// Errors produced by validation of user-supplied inputs.
///
/// Dimension mismatches between values that already passed validation
/// (e.g. convolving densities built for different `m`) are programming
/// errors and panic instead.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its documented range.
    #[error("out of range: {0}")]
    Range(String),

    /// A configuration value failed validation.
    #[error("invalid configuration: {0}")]
    Validation(String),

    /// The requested computation is not feasible at the given size.
    #[error("infeasible: {0}")]
    Infeasible(String),
}
