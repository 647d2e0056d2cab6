//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by geometry, path, integration, and quadrature routines.
#[derive(Debug, Error)]
pub enum Error {
    /// A point failed the manifold membership predicate.
    #[error("point not on manifold ({context}): deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    NotOnManifold {
        context: String,
        deviation: f64,
        tolerance: f64,
    },

    /// A vector is not tangent at its declared base point.
    #[error("vector not tangent at base point: deviation {deviation:.3e}")]
    NotTangent { deviation: f64 },

    /// Two tangent vectors were combined at different base points.
    #[error("mismatched base points: distance {0:.3e}")]
    MismatchedBase(f64),

    /// Inverse exponential requested at or too close to the cut locus.
    #[error("cut locus: {0}")]
    CutLocus(String),

    /// A precondition on the inputs was violated.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Quadrature or geodesic integration failed to certify its accuracy.
    #[error("accuracy: {0}")]
    Accuracy(String),

    /// The requested computation would exceed a resource cap.
    #[error("resource: {0}")]
    Resource(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// True for errors that indicate a numeric/accuracy failure rather than
    /// a rejected input. The CLI maps these to a distinct exit status.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Accuracy(_) | Error::Resource(_))
    }
}
