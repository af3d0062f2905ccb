use thiserror::Error;

use crate::cache::CacheError;
use crate::quadrature::QuadError;
use crate::special::{ComplexValue, SpecialError};

/// Errors of the moment, transform and identity computations.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Special(#[from] SpecialError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("{what} = {requested} exceeds the desk-scale ceiling {limit}")]
    DeskScaleExceeded { what: String, requested: f64, limit: f64 },
    #[error("tolerance {tol:e} not met: value {value} carries error {err:e}")]
    ToleranceNotMet { value: f64, err: f64, tol: f64 },
    #[error("Z has a pole at s = 1")]
    PoleAt1,
    #[error("Re s = {re} is below the usable limit {limit} for this continuation")]
    TooCloseToAbscissa { re: f64, limit: f64 },
    #[error("Re s = {re} is not beyond the convergence abscissa {abscissa} + margin {margin}")]
    NotAbsolutelyConvergent { re: f64, abscissa: f64, margin: f64 },
    #[error("least-squares design matrix has condition number {condition:e} above {limit:e}")]
    IllConditionedFit { condition: f64, limit: f64 },
    #[error("contour truncation not closed: |Gamma(s) T^s| = {magnitude:e} at the endpoint s = {endpoint}")]
    TruncationNotClosed { endpoint: ComplexValue, magnitude: f64 },
    #[error("{0} overflows 128-bit integer arithmetic")]
    Overflow(String),
    #[error(transparent)]
    Tauberian(#[from] crate::tauberian::TauberianError),
    #[error("invalid argument: {0}")]
    Domain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// How a reported number was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Exact expression in classical constants.
    ClosedForm,
    /// Least-squares fit to computed data.
    Fitted,
    /// Numerical evaluation (series summation or quadrature).
    Quadrature,
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Provenance::ClosedForm => "closed_form",
            Provenance::Fitted => "fitted",
            Provenance::Quadrature => "quadrature",
        })
    }
}
