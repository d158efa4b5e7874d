use std::path::PathBuf;

/// Process exit codes: 0 success, 1 validation, 2 runtime, 3 check failure.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, malformed input files, out-of-range requests.
    #[error("{0}")]
    Validation(String),

    /// I/O and computation failures on valid inputs.
    #[error("{0}")]
    Runtime(String),

    /// A `check` suite reported failures.
    #[error("{failed} of {total} checks failed")]
    CheckFailed { failed: usize, total: usize },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::CheckFailed { .. } => 3,
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        CliError::Runtime(format!("{}: {err}", path.display()))
    }

    pub fn malformed(path: &std::path::Path, detail: impl std::fmt::Display) -> Self {
        CliError::Validation(format!("{}: {detail}", path.display()))
    }
}

impl From<thr_core::Error> for CliError {
    fn from(err: thr_core::Error) -> Self {
        use thr_core::Error::*;
        match &err {
            InvalidConfig(_) | InvalidGeometry(_) | GridMismatch(_) | EmptyDataset(_) => {
                CliError::Validation(err.to_string())
            }
            _ => CliError::Runtime(err.to_string()),
        }
    }
}

pub fn write_file(path: &PathBuf, bytes: &[u8]) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
    }
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}
