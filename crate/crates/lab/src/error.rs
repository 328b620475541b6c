use std::path::PathBuf;

use serde::Serialize;

pub type Result<T, E = LabError> = std::result::Result<T, E>;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION: i32 = 2;
    pub const BUDGET: i32 = 3;
    pub const INVARIANT: i32 = 4;
}

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("{stage}: {source}")]
    Core {
        stage: String,
        #[source]
        source: typnet_core::Error,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Core { source, .. } if source.is_budget() => exit::BUDGET,
            LabError::Core { source, .. } if source.is_invariant() => exit::INVARIANT,
            _ => exit::VALIDATION,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.exit_code() {
            exit::BUDGET => "budget",
            exit::INVARIANT => "invariant",
            _ => "validation",
        }
    }

    /// The JSON object printed on stderr when the CLI fails.
    pub fn report(&self) -> ErrorReport {
        ErrorReport { error: self.kind(), exit_code: self.exit_code(), message: self.to_string() }
    }
}

#[derive(Debug, Serialize)]
pub struct ErrorReport {
    pub error: &'static str,
    pub exit_code: i32,
    pub message: String,
}

/// Attaches a stage name to core errors.
pub trait Stage<T> {
    fn stage(self, stage: &str) -> Result<T>;
}

impl<T> Stage<T> for typnet_core::Result<T> {
    fn stage(self, stage: &str) -> Result<T> {
        self.map_err(|source| LabError::Core { stage: stage.to_string(), source })
    }
}

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> LabError {
    let path = path.into();
    move |source| LabError::Io { path, source }
}
