use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("{context}: {source}")]
    Core {
        context: String,
        #[source]
        source: sagsin_core::Error,
    },
    #[error("invalid sweep spec: {0}")]
    Spec(String),
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("csv: {0}")]
    Csv(String),
}

impl HarnessError {
    pub fn core(context: impl Into<String>, source: sagsin_core::Error) -> Self {
        HarnessError::Core { context: context.into(), source }
    }

    pub fn io(path: &std::path::Path, e: impl std::fmt::Display) -> Self {
        HarnessError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Core { source, .. } => source.kind(),
            HarnessError::Spec(_) => "InvalidSpec",
            HarnessError::Io { .. } => "Io",
            HarnessError::Csv(_) => "Csv",
        }
    }

    /// `{"error": kind, "message": ..., "context": ...}`.
    pub fn to_json(&self) -> serde_json::Value {
        let context = match self {
            HarnessError::Core { context, .. } => Some(context.clone()),
            HarnessError::Io { path, .. } => Some(path.clone()),
            _ => None,
        };
        json!({ "error": self.kind(), "message": self.to_string(), "context": context })
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Csv(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
