use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain an operation accepts (non-finite
    /// values, negative distances, empty inputs).
    #[error("input domain: {0}")]
    InputDomain(String),

    /// A range sensor was queried from inside solid geometry.
    #[error("sensor fault: origin ({x}, {y}, {z}) lies inside an obstacle")]
    SensorFault { x: f64, y: f64, z: f64 },

    /// Scenario or world construction violated a geometric invariant.
    #[error("invalid scenario: {0}")]
    Scenario(String),

    /// A statistic is undefined for the given data.
    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::InputDomain(msg.into())
}
