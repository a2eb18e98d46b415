use std::io::Write;
use std::path::PathBuf;

use icdoc_core::rdl::digest;
use icdoc_core::{Digest, Manifest};
use icdoc_tracker::TrackerClient;

use crate::{Exit, PipelineError};

#[derive(Debug, Clone)]
pub struct CheckOptions {
    /// File path or `http(s)://` URL of the published manifest.
    pub manifest: String,
    pub local_dir: PathBuf,
    pub tracker: Option<String>,
    pub reporter: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Drift {
    Missing {
        path: String,
    },
    Mismatch {
        path: String,
        expected: Digest,
        actual: Digest,
    },
}

#[derive(Debug, Clone)]
pub struct CheckOutcome {
    pub drift: Vec<Drift>,
    /// Mismatches that were recorded on the tracker.
    pub reported: usize,
    pub exit: Exit,
}

fn load_manifest(location: &str) -> Result<Manifest, PipelineError> {
    let text = if location.starts_with("http://") || location.starts_with("https://") {
        let resp = reqwest::blocking::get(location)
            .and_then(|r| r.error_for_status())
            .map_err(|e| PipelineError::Io(format!("cannot fetch manifest {location}: {e}")))?;
        resp.text()
            .map_err(|e| PipelineError::Io(format!("cannot fetch manifest {location}: {e}")))?
    } else {
        std::fs::read_to_string(location)
            .map_err(|e| PipelineError::Io(format!("cannot read manifest {location}: {e}")))?
    };
    Manifest::from_json(&text).map_err(|e| PipelineError::Io(format!("{location}: {e}")))
}

/// Compare local copies of the manifest's artifacts against their published
/// digests. Mismatches are reported to the tracker when one is given.
pub fn check(opts: &CheckOptions, out: &mut dyn Write) -> Result<CheckOutcome, PipelineError> {
    let manifest = load_manifest(&opts.manifest)?;
    if !opts.local_dir.is_dir() {
        return Err(PipelineError::Io(format!(
            "local directory {} does not exist",
            opts.local_dir.display()
        )));
    }
    let mut drift = Vec::new();
    for artifact in &manifest.artifacts {
        let path = opts.local_dir.join(&artifact.path);
        match std::fs::read(&path) {
            Ok(bytes) => {
                let actual = digest(&bytes);
                if actual != artifact.sha256 {
                    let _ = writeln!(
                        out,
                        "drift {}: expected {}, found {}",
                        artifact.path, artifact.sha256, actual
                    );
                    drift.push(Drift::Mismatch {
                        path: artifact.path.clone(),
                        expected: artifact.sha256.clone(),
                        actual,
                    });
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                let _ = writeln!(out, "missing {}", artifact.path);
                drift.push(Drift::Missing {
                    path: artifact.path.clone(),
                });
            }
            Err(e) => return Err(PipelineError::io("read", &path, e)),
        }
    }

    let mut reported = 0;
    if let Some(url) = &opts.tracker {
        let client = TrackerClient::new(url);
        for d in &drift {
            if let Drift::Mismatch {
                path,
                expected,
                actual,
            } = d
            {
                match client.check_failure(&manifest.doc_id, path, expected, actual, &opts.reporter)
                {
                    Ok(_) => reported += 1,
                    Err(e) => {
                        let _ = writeln!(out, "warning: could not report drift of {path}: {e}");
                    }
                }
            }
        }
        match client.get(&manifest.doc_id) {
            Ok(Some(view)) => {
                if let Some(latest) = view.record.latest() {
                    if latest.version > manifest.version {
                        let _ = writeln!(
                            out,
                            "warning: {} {} is published; manifest is for {}",
                            manifest.doc_id, latest.version, manifest.version
                        );
                    }
                }
            }
            Ok(None) => {}
            Err(e) => {
                let _ = writeln!(out, "warning: cannot query tracker: {e}");
            }
        }
    }

    let total = manifest.artifacts.len();
    let exit = if drift.is_empty() {
        let _ = writeln!(out, "{total} of {total} artifacts up to date");
        Exit::Ok
    } else {
        let _ = writeln!(out, "{} of {total} artifacts out of date", drift.len());
        Exit::Drift
    };
    Ok(CheckOutcome {
        drift,
        reported,
        exit,
    })
}
