//! The `icdoc` pipeline: build and publish ICDs, dry-run the quality gates,
//! check local artifacts for drift, and run the tracker service.

mod build;
mod check;
mod error;
mod inputs;

pub use build::{build, gates_dry_run, BuildOptions, BuildOutcome, GatesOptions};
pub use check::{check, CheckOptions, CheckOutcome, Drift};
pub use error::{Exit, PipelineError};

/// Start the tracker service and block until the process is stopped.
pub fn serve(state_file: std::path::PathBuf, listen: &str) -> Result<(), PipelineError> {
    icdoc_tracker::server::serve_forever(state_file, listen)
        .map_err(|e| PipelineError::Io(e.to_string()))
}
