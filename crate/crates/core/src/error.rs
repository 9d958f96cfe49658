use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("covariance matrix is not positive definite (jitter reached {jitter:e})")]
    FactorizationFailure { jitter: f64 },

    #[error("spline length normalisation did not converge after {iterations} iterations")]
    NormalizationFailure { iterations: usize },

    #[error("spline tangent vanishes at the end point")]
    DegenerateTangent,

    #[error("spline parameter u = {0} outside [0, 1]")]
    ParameterOutOfRange(f64),

    #[error("query point ({x}, {y}) lies outside the terrain grid")]
    OutOfDomain { x: f64, y: f64 },

    #[error("no feasible action available")]
    NoFeasibleAction,

    #[error("series length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by the experiment description rather than by a
    /// failure while running it.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::Config(_) | Error::InvalidParameter(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
