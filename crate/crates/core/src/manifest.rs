//! Publication record of one ICD version.

use std::collections::BTreeSet;
use std::path::{Component, Path};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::markup::{DocId, Document, InlineKind};
use crate::rdl::Digest;
use crate::Version;

/// A reference to an exact published version of another ICD.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Pin {
    pub doc_id: DocId,
    pub version: Version,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactEntry {
    /// Relative to the build output directory, `/`-separated.
    pub path: String,
    pub sha256: Digest,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub doc_id: DocId,
    pub version: Version,
    pub src: String,
    pub refs: Vec<Pin>,
    pub artifacts: Vec<ArtifactEntry>,
    pub build_location: Option<String>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ManifestError {
    #[error("malformed manifest: {0}")]
    Json(String),
    #[error("duplicate artifact path '{0}'")]
    DuplicatePath(String),
    #[error("artifact path '{0}' must be relative and stay inside the output directory")]
    UnsafePath(String),
}

/// The distinct `icdref:` pins of a document, sorted.
pub fn document_refs(doc: &Document) -> Vec<Pin> {
    let pins: BTreeSet<Pin> = doc
        .inlines()
        .filter_map(|node| match &node.kind {
            InlineKind::IcdRef {
                doc_id, version, ..
            } => Some(Pin {
                doc_id: doc_id.clone(),
                version: *version,
            }),
            _ => None,
        })
        .collect();
    pins.into_iter().collect()
}

fn safe_relative(path: &str) -> bool {
    !path.is_empty()
        && !path.contains('\\')
        && Path::new(path)
            .components()
            .all(|c| matches!(c, Component::Normal(_)))
}

impl Manifest {
    pub fn validate(&self) -> Result<(), ManifestError> {
        let mut seen = BTreeSet::new();
        for a in &self.artifacts {
            if !safe_relative(&a.path) {
                return Err(ManifestError::UnsafePath(a.path.clone()));
            }
            if !seen.insert(a.path.as_str()) {
                return Err(ManifestError::DuplicatePath(a.path.clone()));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self, ManifestError> {
        let m: Manifest =
            serde_json::from_str(text).map_err(|e| ManifestError::Json(e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    /// Pretty-printed JSON with a trailing newline. Field order is fixed, so
    /// equal manifests serialize to identical bytes.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("manifest serializes");
        s.push('\n');
        s
    }

    pub fn artifact(&self, path: &str) -> Option<&ArtifactEntry> {
        self.artifacts.iter().find(|a| a.path == path)
    }
}
