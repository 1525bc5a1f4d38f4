use thiserror::Error;

/// Errors raised by the geometry, estimation and sampling layers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument does not belong to the object it is being used with
    /// (wrong manifold dimension, tangent anchored at another point, ...).
    #[error("contract violation: {0}")]
    ContractViolation(String),

    /// A point or tangent vector fails its membership predicate.
    #[error("not a member of {space}: {reason}")]
    Membership { space: &'static str, reason: String },

    /// An input lies outside the domain where the operation is defined.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// A matrix is too close to singular to work with.
    #[error("ill-conditioned matrix: smallest eigenvalue {min_eigenvalue:e}")]
    Conditioning { min_eigenvalue: f64 },

    /// Rotational alignment of two preshapes is undefined because their
    /// Hermitian inner product vanishes.
    #[error("alignment undefined: |<p, q>| = {modulus:e}")]
    AlignmentUndefined { modulus: f64 },

    /// Invalid configuration (ball too large, bad parameters, sampler starved).
    #[error("configuration error: {0}")]
    Configuration(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn domain(op: &'static str, reason: impl Into<String>) -> Self {
        Error::Domain {
            op,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(reason: impl Into<String>) -> Self {
        Error::Configuration(reason.into())
    }
}
