use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter or scenario field failed validation.
    #[error("invalid field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    /// The raw constant-jerk polynomial was evaluated past its velocity zero.
    #[error("jerk phase evaluated at t={t} s, past the velocity zero at t2={t2} s")]
    JerkPhaseOverrun { t: f64, t2: f64 },

    #[error("time-to-collision undefined for non-positive gap {0} m")]
    NonPositiveGap(f64),

    #[error("response envelope requested for a scene that is still safe (margin {margin} m)")]
    SceneStillSafe { margin: f64 },

    #[error("malformed trace: {0}")]
    MalformedTrace(String),

    #[error("run limit exceeded: {requested} runs requested, cap is {cap}")]
    RunLimit { requested: usize, cap: usize },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}
