use thiserror::Error;

/// Errors raised by the severity, estimation and capital routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside domain: {0}")]
    Domain(String),

    /// The SNP gradient polynomial vanishes at an observation; the likelihood is -inf there.
    #[error("degenerate transform gradient at x = {x}")]
    DegenerateGradient { x: f64 },

    #[error("failed to converge: {0}")]
    Convergence(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Nested models whose log-likelihoods are out of order by more than the tolerance.
    #[error("nesting violation: restricted logL {restricted} exceeds full logL {full}")]
    NestingViolation { restricted: f64, full: f64 },

    #[error("simulation failed at iteration {iteration}: {source}")]
    Simulation {
        iteration: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("{0}")]
    Io(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

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

pub(crate) fn ensure_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

pub(crate) fn ensure_finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {v}")))
    }
}

pub(crate) fn ensure_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")))
    }
}
