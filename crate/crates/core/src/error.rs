use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter violates its invariant.
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The quantity diverges at (or within the guard band of) the requested point.
    #[error("singularity at {at}: {what}")]
    Singularity { at: f64, what: &'static str },
    /// The operation has no implementation for this lattice dimension.
    #[error("dimension {d} not supported: {why}")]
    Unsupported { d: usize, why: &'static str },
    /// An iterative method failed to meet its tolerance.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
