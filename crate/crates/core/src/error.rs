//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("site index {site} out of range for {rotors} rotors")]
    SiteOutOfRange { site: usize, rotors: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator diagonal has imaginary part {0:.3e} beyond tolerance")]
    NonRealDiagonal(f64),

    #[error("linear algebra backend: {0}")]
    Linalg(String),

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("steady-state solve: {0}")]
    SteadyState(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("integration unstable: {0}")]
    Instability(String),

    #[error("current pair-independence violated: {0}")]
    PairIndependence(String),

    #[error("stationarity violated: {0}")]
    Stationarity(String),
}

impl From<ndarray_linalg::error::LinalgError> for Error {
    fn from(e: ndarray_linalg::error::LinalgError) -> Self {
        Error::Linalg(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
