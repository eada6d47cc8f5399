use thiserror::Error;

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown {what} `{id}`")]
    NotFound { what: &'static str, id: String },

    /// A payload that fails schema validation; `path` points at the offending field.
    #[error("invalid payload at `{path}`: {message}")]
    Invalid { path: String, message: String },

    #[error("no qualifying data for {interface} on `{stimulus_id}`")]
    NoQualifyingData { stimulus_id: String, interface: String },

    #[error(transparent)]
    Core(#[from] attnlab_core::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("corrupt store record: {0}")]
    Json(#[from] serde_json::Error),
}

impl ServiceError {
    pub(crate) fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        ServiceError::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn not_found(what: &'static str, id: impl Into<String>) -> Self {
        ServiceError::NotFound { what, id: id.into() }
    }
}
