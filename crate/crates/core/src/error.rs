use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Malformed circuit or gate: bad qubit index, repeated measurement, missing angle.
    #[error("structural error: {0}")]
    Structure(String),
    /// A classical value outside the encodable range `[-1, 1]`.
    #[error("value {value} at {location} is outside [-1, 1]")]
    Domain { value: f64, location: String },
    /// An argument that violates an operation precondition.
    #[error("invalid argument: {0}")]
    Argument(String),
    /// The least-squares calibration has no unique solution.
    #[error("calibration fit failed: {0}")]
    Fit(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    /// Loss or parameters stopped being finite during training.
    #[error("non-finite value during training: {0}")]
    NonFinite(String),
}

impl Error {
    pub(crate) fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub(crate) fn argument(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
