use thiserror::Error;

use crate::special::QuadratureResult;

/// Errors produced by the numerical routines in this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Adaptive quadrature hit its subdivision limit. The best estimate is kept.
    #[error(
        "quadrature did not converge after {} subdivisions (estimate {}, error estimate {})",
        .best.subdivisions, .best.value, .best.abs_error_estimate
    )]
    Convergence { best: QuadratureResult },

    /// A quantity that is positive in exact arithmetic came out non-positive or
    /// non-finite in floating point.
    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    /// The analytic upper bound on the shape parameter does not exceed the lower bound.
    #[error("infeasible bracket: upper bound {upper} does not exceed lower bound {lower}")]
    InfeasibleBracket { lower: f64, upper: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}
