use std::path::PathBuf;

/// Errors produced by the link simulator.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("pilot layout invalid: {0}")]
    LayoutInvalid(String),

    #[error("bit stream too short: need {needed} bits, got {available}")]
    InsufficientBits { needed: usize, available: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("channel estimate is singular (no finite nonzero gain)")]
    SingularEstimate,

    #[error("no pilot observations supplied")]
    EmptyPilots,

    #[error("known pilot symbol at subcarrier {0} is zero")]
    ZeroPilotSymbol(usize),

    #[error("symbol time must be positive, got {0}")]
    NonPositiveSymbolTime(f64),

    #[error("pilot observation has zero energy")]
    ZeroEnergy,

    #[error("pattern index {0} out of range 0..=3")]
    IndexOutOfRange(usize),

    #[error("{context}: {source}")]
    Io {
        context: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            context: path.into(),
            source,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
