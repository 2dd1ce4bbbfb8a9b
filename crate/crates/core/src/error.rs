use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} = {value} lies outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: String,
    },

    #[error("operation requires a firing rate with a density; got {0}")]
    UnsupportedVariant(&'static str),

    #[error("quadrature did not converge (last two estimates {previous} and {last})")]
    QuadratureFailure { previous: f64, last: f64 },

    #[error("assumption 1 violated: {0}")]
    Assumption1Violated(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("iterate leaves the ordered interval at x = {x} (excess {excess:e})")]
    OrderViolation { x: f64, excess: f64 },

    #[error("width iteration diverged at iteration {iteration}: value {value} at t = {t}")]
    Divergence { iteration: usize, t: f64, value: f64 },

    #[error("profile is not a bump at x = {x}: {reason}")]
    NotABump { x: f64, reason: String },

    #[error("level {level} outside the range [{min}, {max}] of the decreasing branch")]
    LevelOutOfRange { level: f64, min: f64, max: f64 },

    #[error("non-finite state after step {step}")]
    BlowUp { step: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("csv line {line}: {reason}")]
    Csv { line: usize, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
