use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the security computations.
///
/// Numeric payloads are carried as `f64` regardless of the scalar type the
/// computation ran in.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{name} = {value} is outside its domain {domain}")]
    Domain {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("invalid bracket [{lower}, {upper}]")]
    InvalidBracket { lower: f64, upper: f64 },

    #[error("no sign change on [{lower}, {upper}]")]
    NoSignChange { lower: f64, upper: f64 },

    #[error("solver did not converge after {iterations} iterations")]
    NotConverged { iterations: usize },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(&'static str),

    #[error("unphysical covariance matrix: {0}")]
    Unphysical(String),

    #[error("degenerate homodyne measurement (measured variance {0})")]
    DegenerateMeasurement(f64),

    #[error("invalid setup: {0}")]
    InvalidSetup(String),
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: impl Into<f64>, domain: &'static str) -> Self {
        Error::Domain {
            name,
            value: value.into(),
            domain,
        }
    }
}
