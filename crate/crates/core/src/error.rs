use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// The available precision cannot certify the requested quantity.
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    /// The angle specification is malformed or degenerate.
    #[error("invalid angle specification: {0}")]
    InvalidSpec(String),

    /// A caller-side precondition was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("window too large: {candidates} candidate indices exceed the limit of {limit}")]
    WindowTooLarge { candidates: u64, limit: u64 },

    /// The computed distance cannot be certified with the available windows.
    #[error("window too small: value {value} needs radius {needed}, only {available} available")]
    WindowTooSmall {
        value: f64,
        needed: f64,
        available: f64,
    },

    #[error("degenerate basis (determinant {0})")]
    DegenerateBasis(f64),

    /// Lattice fitting failed its two-sided residual check.
    #[error("patch is not a lattice: residual {residual}, {unmatched} unmatched lattice points")]
    NotALattice { residual: f64, unmatched: usize },

    #[error("too many points to plot: {count} > {limit}")]
    TooManyPoints { count: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
