//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Embedding coordinates violate the model constraint (|p|² = 1 on the
    /// sphere, ⟨p,p⟩ = -1 on the hyperboloid) beyond tolerance.
    #[error("constraint violation: {0}")]
    Constraint(String),

    /// Argument outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An ODE or quadrature failed to reach the requested accuracy.
    #[error("integration failure: {0}")]
    Integration(String),

    /// An iterative series or contraction failed to converge.
    #[error("convergence failure: {0}")]
    Convergence(String),

    /// A norm or integral is unbounded on the requested domain.
    #[error("divergent quantity: {0}")]
    Divergent(String),

    /// Incompatible time or radial grids.
    #[error("grid mismatch: {0}")]
    Grid(String),

    /// Conjugate point: the geodesic-sphere area element degenerated.
    #[error("conjugate point: {0}")]
    ConjugatePoint(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
