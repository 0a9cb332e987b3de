use thiserror::Error;

/// Errors produced by the estimation kernels, network protocols and simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// `|p^H R p|` fell below the degeneracy threshold.
    #[error("degenerate search direction (|p^H R p| = {0:e})")]
    DegenerateDirection(f64),

    /// The previous gradient vanished, so no new conjugate coefficient exists.
    #[error("gradient vanished (|g|^2 = {0:e})")]
    GradientVanished(f64),

    #[error("linear solve failed: {0}")]
    SolverFailure(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("topology error: {0}")]
    Topology(String),

    #[error("repetition {repetition} failed: {source}")]
    Repetition {
        repetition: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("configuration error for key `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("complexity table has no entry: {0}")]
    NotTabulated(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
