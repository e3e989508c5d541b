use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested magnon speed is above the band limit 2Ja/ħ.
    #[error("speed {speed} exceeds the magnon speed limit {limit}")]
    SpeedLimitExceeded { speed: f64, limit: f64 },

    #[error("time {t} is outside the trajectory range [0, {duration}]")]
    OutOfRange { t: f64, duration: f64 },

    #[error("degenerate spectrum: lowest gap {gap:e}")]
    DegenerateSpectrum { gap: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("no regime-I point found: {0}")]
    NoThreshold(String),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Numerical(_) | Error::DegenerateSpectrum { .. } | Error::NoThreshold(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
