use std::fmt;

use windres_core::Error as CoreError;

/// Process exit status for a failed run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    /// Bad flags, configuration or data (exit 1).
    Validation,
    /// Filesystem failure (exit 2).
    Io,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            ExitKind::Validation => 1,
            ExitKind::Io => 2,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub stage: &'static str,
    pub kind: ExitKind,
    pub message: String,
}

impl CliError {
    pub fn config(stage: &'static str, message: impl Into<String>) -> Self {
        CliError {
            stage,
            kind: ExitKind::Validation,
            message: message.into(),
        }
    }

    pub fn io(stage: &'static str, path: &std::path::Path, err: std::io::Error) -> Self {
        CliError {
            stage,
            kind: ExitKind::Io,
            message: format!("{}: {err}", path.display()),
        }
    }

    pub fn from_core(stage: &'static str, err: CoreError) -> Self {
        let kind = if err.is_io() {
            ExitKind::Io
        } else {
            ExitKind::Validation
        };
        CliError {
            stage,
            kind,
            message: err.to_string(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.message)
    }
}

impl std::error::Error for CliError {}

/// Attaches a stage name to core errors.
pub trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T, CliError>;
}

impl<T> StageExt<T> for Result<T, CoreError> {
    fn stage(self, stage: &'static str) -> Result<T, CliError> {
        self.map_err(|e| CliError::from_core(stage, e))
    }
}
