use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid model/network/schedule configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// Invalid detector or estimator parameter.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An enumeration oracle was asked to exceed its test-only budget.
    #[error("enumeration budget exceeded: {0}")]
    Budget(String),

    /// Threshold calibration could not bracket or converge.
    #[error("calibration failed: {0}")]
    Calibration(String),

    /// Too many Monte Carlo trials were censored at the horizon.
    #[error("censoring budget exceeded: {censored} of {trials} trials hit the horizon")]
    Censoring { censored: u64, trials: u64 },
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}
