use std::path::Path;

use icdoc_core::ParseError;
use thiserror::Error;

/// Process exit status of every `icdoc` command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Exit {
    Ok = 0,
    GateFailure = 1,
    Syntax = 2,
    Io = 3,
    Drift = 4,
    TrackerRejected = 5,
}

impl Exit {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{file}:{err}")]
    Syntax { file: String, err: ParseError },
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Config(String),
    #[error("tracker rejected the publication: {0}")]
    TrackerRejected(String),
}

impl PipelineError {
    pub fn exit(&self) -> Exit {
        match self {
            PipelineError::Syntax { .. } => Exit::Syntax,
            PipelineError::Io(_) | PipelineError::Config(_) => Exit::Io,
            PipelineError::TrackerRejected(_) => Exit::TrackerRejected,
        }
    }

    pub(crate) fn syntax(path: &Path, err: ParseError) -> Self {
        PipelineError::Syntax {
            file: path.display().to_string(),
            err,
        }
    }

    pub(crate) fn io(what: &str, path: &Path, e: std::io::Error) -> Self {
        PipelineError::Io(format!("cannot {what} {}: {e}", path.display()))
    }
}
