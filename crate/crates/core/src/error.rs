//! Error type shared across the library.

use thiserror::Error;

/// Library-wide error type.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A parameter violated a domain constraint (e.g. `beta < 2`, unordered
    /// pulse times, negative attenuation).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// Adaptive quadrature exhausted its subdivision budget before reaching
    /// the requested tolerance. Carries the best estimate obtained.
    #[error("quadrature did not converge: estimate {estimate}, achieved error {achieved}, requested {requested}")]
    QuadratureNoConvergence {
        estimate: f64,
        achieved: f64,
        requested: f64,
    },

    /// Every candidate in a minimization had infinite relative error, so no
    /// optimum exists.
    #[error("no information extractable: {0}")]
    NoInformation(String),

    /// A measurement record cannot support the requested estimate.
    #[error("degenerate measurement record: {0}")]
    DegenerateRecord(String),
}

pub type Result<T> = std::result::Result<T, Error>;
