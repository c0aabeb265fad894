use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter is outside its allowed domain.
    #[error("parameter `{name}` out of domain: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The configuration file could not be read or parsed.
    #[error("configuration error: {0}")]
    Config(String),

    /// An argument violates an operation's mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A documented precondition does not hold.
    #[error("precondition failed: {0}")]
    Precondition(String),

    /// Input data is malformed (non-uniform sampling, too few points, ...).
    #[error("invalid input: {0}")]
    Input(String),

    /// A requested range is not covered by the data.
    #[error("range error: {0}")]
    Range(String),

    /// An integrator produced a non-finite state.
    #[error("integration diverged after t = {last_valid_t:e} s")]
    Divergence { last_valid_t: f64 },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter { name, reason: reason.into() }
    }

    /// True for errors caused by user-supplied configuration rather than by a run.
    pub fn is_configuration(&self) -> bool {
        matches!(self, Error::Parameter { .. } | Error::Config(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
