use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("gimbal singularity: pitch {pitch} rad is not inside (-pi/2, pi/2)")]
    GimbalSingularity { pitch: f64 },

    #[error("radar lies on the aircraft body z-axis (horizontal offset {offset} m)")]
    BodyAxisSingularity { offset: f64 },

    #[error("aircraft and radar positions coincide")]
    CoincidentPositions,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid scenario field `{field}`: {reason}")]
    Validation { field: String, reason: String },

    #[error("malformed scenario: {0}")]
    Parse(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Validation { .. } | Error::Parse(_))
    }
}
