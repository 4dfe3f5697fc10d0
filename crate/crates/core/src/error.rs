use thiserror::Error;

/// Errors raised by the numerical laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite input `{0}`")]
    NonFinite(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// An admissibility condition of the exponent system failed.
    #[error("inadmissible exponents: {}", .0.join("; "))]
    Inadmissible(Vec<String>),

    /// A closed-form integral or quantity diverges under the given parameters.
    #[error("divergent: {0}")]
    Divergent(String),

    #[error("resource guard: {0}")]
    ResourceLimit(String),

    #[error("field is identically zero")]
    ZeroField,

    #[error("iteration collapsed: {0}")]
    Collapse(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub(crate) fn ensure_finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite(name))
    }
}
