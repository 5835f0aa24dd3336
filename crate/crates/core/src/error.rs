use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The antenna cone does not intersect the ground in a finite ellipse,
    /// or the UE sits at or below BS height with a tilted antenna.
    #[error("invalid antenna geometry: {0}")]
    InvalidGeometry(String),

    #[error("ground distance {r} m lies outside the footprint [{lo}, {hi}] m")]
    OutOfFootprint { r: f64, lo: f64, hi: f64 },

    #[error("quadrature did not converge on [{a}, {b}]: error estimate {error:e} exceeds tolerance {tolerance:e}")]
    QuadratureFailure {
        a: f64,
        b: f64,
        error: f64,
        tolerance: f64,
    },

    #[error("invalid scenario: {0}")]
    Validation(String),

    #[error("cannot parse scenario: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
