use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad argument: wrong shape, out-of-range index, non-finite entry.
    #[error("invalid input: {0}")]
    Input(String),
    /// The requested point lies on (or numerically at) the spectrum.
    #[error("spectrum error: {0}")]
    Spectrum(String),
    /// Quadrature or grid not fine enough for the requested accuracy.
    #[error("resolution error: {0}")]
    Resolution(String),
    /// A series or weighted integral fails to converge.
    #[error("divergence: {0}")]
    Divergence(String),
    /// A dense factorisation failed or produced non-finite output.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A checked inequality did not hold.
    #[error("bound violated: {0}")]
    BoundViolation(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn input<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Input(msg.into()))
}
