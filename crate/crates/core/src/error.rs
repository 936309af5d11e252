use thiserror::Error;

use crate::params::ValidationReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse parameters: {0}")]
    Parse(#[from] ParseError),

    #[error("parameter `{0}` is not a finite number")]
    NonFinite(&'static str),

    #[error("parameters are not admissible: {}", .0.failed_names().join(", "))]
    Inadmissible(Box<ValidationReport>),

    #[error("{what} = {value} is outside {range}")]
    Domain {
        what: &'static str,
        value: f64,
        range: &'static str,
    },

    #[error("integration would take {steps} steps, over the cap of {cap}")]
    Budget { steps: u64, cap: u64 },

    #[error("model assumption violated: {0}")]
    Assumption(String),

    #[error("could not draw admissible parameters after {0} attempts")]
    SamplerExhausted(usize),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Problems with a parameter document, always naming the offending key.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("malformed document: {0}")]
    Syntax(String),
    #[error("document must be a flat key-value object")]
    NotAnObject,
    #[error("missing key `{0}`")]
    Missing(&'static str),
    #[error("unknown key `{0}`")]
    Unknown(String),
    #[error("key `{0}` must be a number")]
    WrongType(String),
    #[error("key `{0}` is not finite")]
    NonFinite(String),
}

impl ParseError {
    /// The key the error refers to, if any.
    pub fn key(&self) -> Option<&str> {
        match self {
            ParseError::Missing(k) => Some(k),
            ParseError::Unknown(k) | ParseError::WrongType(k) | ParseError::NonFinite(k) => Some(k),
            ParseError::Syntax(_) | ParseError::NotAnObject => None,
        }
    }
}

pub(crate) fn check_unit(what: &'static str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            range: "[0, 1]",
        })
    }
}
