use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::Registry;

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("cannot read state file {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("corrupt state file {path}: {message}")]
    Corrupt { path: PathBuf, message: String },
    #[error("cannot write state file {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Load the registry from `path`. A missing file is an empty registry.
pub fn load(path: &Path) -> Result<Registry, StoreError> {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Registry::new()),
        Err(source) => {
            return Err(StoreError::Read {
                path: path.to_path_buf(),
                source,
            })
        }
    };
    let corrupt = |message: String| StoreError::Corrupt {
        path: path.to_path_buf(),
        message,
    };
    let registry: Registry = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    registry.check_consistency().map_err(corrupt)?;
    Ok(registry)
}

/// Write the registry as pretty JSON to a temporary file next to `path` and
/// rename it into place.
pub fn save(path: &Path, registry: &Registry) -> Result<(), StoreError> {
    let err = |source| StoreError::Write {
        path: path.to_path_buf(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(err)?;
    let mut json = serde_json::to_string_pretty(registry).expect("registry serializes");
    json.push('\n');
    tmp.write_all(json.as_bytes()).map_err(err)?;
    tmp.as_file().sync_all().map_err(err)?;
    tmp.persist(path).map_err(|e| err(e.error))?;
    Ok(())
}
