use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid {field}: {reason}")]
    Invalid { field: &'static str, reason: String },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn invalid(field: &'static str, reason: impl Into<String>) -> Self {
        CliError::Invalid {
            field,
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn field(&self) -> Option<&'static str> {
        match self {
            CliError::Invalid { field, .. } => Some(field),
            _ => None,
        }
    }

    /// 2 for bad input, 3 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io { .. } => 1,
        }
    }
}

impl From<relay_core::Error> for CliError {
    fn from(e: relay_core::Error) -> Self {
        match e {
            relay_core::Error::InvalidParameter { field, reason } => CliError::Invalid { field, reason },
            relay_core::Error::Numerical(msg) => CliError::Numerical(msg),
        }
    }
}
