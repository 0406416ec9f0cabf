use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while computing bounds, generating runs, or
/// loading scenarios.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A configured magnitude, length, or iteration cap was hit.
    #[error("cap exceeded: {what} (limit {limit})")]
    CapExceeded { what: String, limit: String },

    #[error("value out of domain: {0}")]
    Domain(String),

    #[error("cannot parse {what} from {input:?}")]
    Parse { what: &'static str, input: String },

    #[error("invalid piecewise-linear function: {0}")]
    InvalidFunction(String),

    #[error("sequence too short: need {needed} points, have {available}")]
    InsufficientLength { needed: String, available: usize },

    /// A scenario failed validation; `field` names the offending JSON field.
    #[error("scenario {id:?}, field `{field}`: {message}")]
    Scenario {
        id: String,
        field: String,
        message: String,
    },

    #[error("json: {0}")]
    Json(String),
}

impl Error {
    pub(crate) fn cap(what: impl Into<String>, limit: impl ToString) -> Self {
        Error::CapExceeded {
            what: what.into(),
            limit: limit.to_string(),
        }
    }

    pub fn is_cap_exceeded(&self) -> bool {
        matches!(self, Error::CapExceeded { .. })
    }
}

impl From<serde_json::Error> for Error {
    fn from(err: serde_json::Error) -> Self {
        Error::Json(err.to_string())
    }
}
