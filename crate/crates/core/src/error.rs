use thiserror::Error;

use crate::norms::DecayFit;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exponent out of range: {0}")]
    ExponentOutOfRange(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("quadrature error estimate {estimate:.3e} exceeds target {target:.3e}")]
    Quadrature { estimate: f64, target: f64 },

    #[error("cutoff too small: {0}")]
    CutoffTooSmall(String),

    #[error("log-log fit residual {:.3} exceeds 0.15 (slope {:.4})", .fit.max_residual, .fit.exponent)]
    FitQuality { fit: Box<DecayFit> },

    #[error("grid: {0}")]
    Grid(String),

    #[error("spectrum: {0}")]
    Spectrum(String),

    #[error("Picard iteration diverged at step {iteration} (ratio {ratio:.3})")]
    Divergence { iteration: usize, ratio: f64 },

    #[error("solution amplitude {amplitude:.3e} passed the blow-up guard at t = {time:.4}")]
    BlowUp { time: f64, amplitude: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
