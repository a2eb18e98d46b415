use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use chrono::{SecondsFormat, Utc};
use icdoc_core::{ArtifactEntry, Digest, DocId, Manifest, Pin, Version};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Draft,
    Published,
    Failed,
    RevisionRequired,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Draft => "DRAFT",
            Status::Published => "PUBLISHED",
            Status::Failed => "FAILED",
            Status::RevisionRequired => "REVISION_REQUIRED",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionRecord {
    pub version: Version,
    pub src: String,
    pub refs: Vec<Pin>,
    pub build_location: String,
    pub artifacts: Vec<ArtifactEntry>,
    /// RFC 3339, informational only.
    pub published_at: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub doc_id: DocId,
    pub versions: Vec<VersionRecord>,
    pub status: Status,
    pub status_reason: String,
}

impl DocumentRecord {
    pub fn latest(&self) -> Option<&VersionRecord> {
        self.versions.last()
    }

    pub fn version(&self, v: &Version) -> Option<&VersionRecord> {
        self.versions.iter().find(|r| &r.version == v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EventKind {
    Registered,
    Published {
        version: Version,
    },
    BuildFailed {
        summary: String,
    },
    CheckFailed {
        path: String,
        expected: Digest,
        actual: Digest,
        reporter: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrackerEvent {
    pub seq: u64,
    pub doc_id: DocId,
    pub at: String,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StatusChange {
    pub doc_id: DocId,
    pub from: Status,
    pub to: Status,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TrackerError {
    #[error("unknown document '{0}'")]
    UnknownDocument(DocId),
    #[error("document '{0}' is already registered")]
    AlreadyRegistered(DocId),
    #[error("version {given} of '{doc_id}' is not greater than the latest version {latest}")]
    NonIncreasingVersion {
        doc_id: DocId,
        latest: Version,
        given: Version,
    },
    #[error("reference {0} {1} is not a published version")]
    DanglingRef(DocId, Version),
    #[error("'{0}' cannot reference itself")]
    SelfReference(DocId),
    #[error("'{0}' is referenced more than once")]
    DuplicateRef(DocId),
    #[error("reference cycle: {}", .0.iter().map(|d| d.as_str()).collect::<Vec<_>>().join(" -> "))]
    Cycle(Vec<DocId>),
    #[error("build_location must not be empty")]
    EmptyBuildLocation,
    #[error("invalid publication: {0}")]
    Invalid(String),
}

/// The state of every tracked ICD plus the append-only event log.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Registry {
    documents: BTreeMap<DocId, DocumentRecord>,
    events: Vec<TrackerEvent>,
}

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn documents(&self) -> impl Iterator<Item = &DocumentRecord> {
        self.documents.values()
    }

    pub fn get(&self, doc_id: &DocId) -> Option<&DocumentRecord> {
        self.documents.get(doc_id)
    }

    pub fn events(&self) -> &[TrackerEvent] {
        &self.events
    }

    pub fn events_for<'a>(&'a self, doc_id: &'a DocId) -> impl Iterator<Item = &'a TrackerEvent> {
        self.events.iter().filter(move |e| &e.doc_id == doc_id)
    }

    /// Checks the invariants a loaded state must satisfy.
    pub fn check_consistency(&self) -> Result<(), String> {
        for (id, rec) in &self.documents {
            if &rec.doc_id != id {
                return Err(format!(
                    "record key '{id}' does not match doc_id '{}'",
                    rec.doc_id
                ));
            }
            if rec
                .versions
                .windows(2)
                .any(|w| w[0].version >= w[1].version)
            {
                return Err(format!("versions of '{id}' are not strictly increasing"));
            }
        }
        if self.events.windows(2).any(|w| w[0].seq >= w[1].seq) {
            return Err("event sequence numbers are not strictly increasing".into());
        }
        Ok(())
    }

    fn append(&mut self, doc_id: &DocId, kind: EventKind) -> TrackerEvent {
        let seq = self.events.last().map_or(1, |e| e.seq + 1);
        let event = TrackerEvent {
            seq,
            doc_id: doc_id.clone(),
            at: now(),
            kind,
        };
        self.events.push(event.clone());
        event
    }

    fn record_mut(&mut self, doc_id: &DocId) -> Result<&mut DocumentRecord, TrackerError> {
        self.documents
            .get_mut(doc_id)
            .ok_or_else(|| TrackerError::UnknownDocument(doc_id.clone()))
    }

    pub fn register_document(&mut self, doc_id: &DocId) -> Result<DocumentRecord, TrackerError> {
        if self.documents.contains_key(doc_id) {
            return Err(TrackerError::AlreadyRegistered(doc_id.clone()));
        }
        let record = DocumentRecord {
            doc_id: doc_id.clone(),
            versions: Vec::new(),
            status: Status::Draft,
            status_reason: String::new(),
        };
        self.documents.insert(doc_id.clone(), record.clone());
        self.append(doc_id, EventKind::Registered);
        Ok(record)
    }

    /// Append a published version and recompute every status. Returns the
    /// records whose status changed, the publisher included.
    pub fn record_publication(
        &mut self,
        manifest: &Manifest,
    ) -> Result<Vec<StatusChange>, TrackerError> {
        let doc_id = &manifest.doc_id;
        manifest
            .validate()
            .map_err(|e| TrackerError::Invalid(e.to_string()))?;
        let record = self
            .documents
            .get(doc_id)
            .ok_or_else(|| TrackerError::UnknownDocument(doc_id.clone()))?;
        if let Some(latest) = record.latest() {
            if manifest.version <= latest.version {
                return Err(TrackerError::NonIncreasingVersion {
                    doc_id: doc_id.clone(),
                    latest: latest.version,
                    given: manifest.version,
                });
            }
        }
        let build_location = manifest.build_location.clone().unwrap_or_default();
        if build_location.trim().is_empty() {
            return Err(TrackerError::EmptyBuildLocation);
        }
        let mut seen = BTreeSet::new();
        for pin in &manifest.refs {
            if &pin.doc_id == doc_id {
                return Err(TrackerError::SelfReference(doc_id.clone()));
            }
            if !seen.insert(&pin.doc_id) {
                return Err(TrackerError::DuplicateRef(pin.doc_id.clone()));
            }
            let published = self
                .documents
                .get(&pin.doc_id)
                .is_some_and(|r| r.version(&pin.version).is_some());
            if !published {
                return Err(TrackerError::DanglingRef(pin.doc_id.clone(), pin.version));
            }
        }
        if let Some(cycle) = self.cycle_through(doc_id, &manifest.refs) {
            return Err(TrackerError::Cycle(cycle));
        }

        let before = self.statuses();
        let record = self.record_mut(doc_id)?;
        record.versions.push(VersionRecord {
            version: manifest.version,
            src: manifest.src.clone(),
            refs: manifest.refs.clone(),
            build_location,
            artifacts: manifest.artifacts.clone(),
            published_at: now(),
        });
        record.status = Status::Published;
        record.status_reason = String::new();
        self.append(
            doc_id,
            EventKind::Published {
                version: manifest.version,
            },
        );
        self.recompute_statuses();
        Ok(self.changes_since(&before))
    }

    /// Path `doc_id -> ... -> doc_id` that would exist if `doc_id`'s latest
    /// references became `refs`. Edges are the references of each document's
    /// latest version.
    fn cycle_through(&self, doc_id: &DocId, refs: &[Pin]) -> Option<Vec<DocId>> {
        fn dfs<'a>(
            reg: &'a Registry,
            node: &'a DocId,
            target: &DocId,
            visited: &mut BTreeSet<&'a DocId>,
            path: &mut Vec<DocId>,
        ) -> bool {
            if node == target {
                return true;
            }
            if !visited.insert(node) {
                return false;
            }
            path.push(node.clone());
            if let Some(latest) = reg.documents.get(node).and_then(|r| r.latest()) {
                for pin in &latest.refs {
                    if dfs(reg, &pin.doc_id, target, visited, path) {
                        return true;
                    }
                }
            }
            path.pop();
            false
        }
        let mut visited = BTreeSet::new();
        for pin in refs {
            let mut path = vec![doc_id.clone()];
            if dfs(self, &pin.doc_id, doc_id, &mut visited, &mut path) {
                path.push(doc_id.clone());
                return Some(path);
            }
        }
        None
    }

    fn statuses(&self) -> BTreeMap<DocId, Status> {
        self.documents
            .iter()
            .map(|(id, r)| (id.clone(), r.status))
            .collect()
    }

    fn changes_since(&self, before: &BTreeMap<DocId, Status>) -> Vec<StatusChange> {
        self.documents
            .values()
            .filter_map(|r| {
                let from = before.get(&r.doc_id).copied().unwrap_or(Status::Draft);
                (from != r.status).then(|| StatusChange {
                    doc_id: r.doc_id.clone(),
                    from,
                    to: r.status,
                    reason: r.status_reason.clone(),
                })
            })
            .collect()
    }

    /// Stale pins of the latest version of `record`, as reason text.
    fn stale_pins(&self, record: &DocumentRecord) -> Vec<String> {
        let Some(latest) = record.latest() else {
            return Vec::new();
        };
        latest
            .refs
            .iter()
            .filter_map(|pin| {
                let newest = self.documents.get(&pin.doc_id)?.latest()?;
                (pin.version < newest.version).then(|| {
                    format!(
                        "references {} {} but the latest published version is {}",
                        pin.doc_id, pin.version, newest.version
                    )
                })
            })
            .collect()
    }

    /// Set every published document to `REVISION_REQUIRED` when its latest
    /// version pins an outdated version of another document, and back to
    /// `PUBLISHED` otherwise. Documents in `DRAFT` or `FAILED` are left
    /// alone. Idempotent.
    pub fn recompute_statuses(&mut self) -> Vec<StatusChange> {
        let before = self.statuses();
        let updates: Vec<(DocId, Status, String)> = self
            .documents
            .values()
            .filter(|r| matches!(r.status, Status::Published | Status::RevisionRequired))
            .map(|r| {
                let stale = self.stale_pins(r);
                if stale.is_empty() {
                    (r.doc_id.clone(), Status::Published, String::new())
                } else {
                    (r.doc_id.clone(), Status::RevisionRequired, stale.join("; "))
                }
            })
            .collect();
        for (id, status, reason) in updates {
            let r = self.documents.get_mut(&id).expect("record exists");
            r.status = status;
            r.status_reason = reason;
        }
        self.changes_since(&before)
    }

    pub fn record_build_failure(
        &mut self,
        doc_id: &DocId,
        summary: &str,
    ) -> Result<DocumentRecord, TrackerError> {
        let record = self.record_mut(doc_id)?;
        record.status = Status::Failed;
        record.status_reason = summary.to_string();
        let record = record.clone();
        self.append(
            doc_id,
            EventKind::BuildFailed {
                summary: summary.to_string(),
            },
        );
        Ok(record)
    }

    /// Log that a consumer holds artifacts that differ from the published
    /// ones. The document's status is not touched.
    pub fn report_check_failure(
        &mut self,
        doc_id: &DocId,
        path: &str,
        expected: Digest,
        actual: Digest,
        reporter: &str,
    ) -> Result<TrackerEvent, TrackerError> {
        self.record_mut(doc_id)?;
        Ok(self.append(
            doc_id,
            EventKind::CheckFailed {
                path: path.to_string(),
                expected,
                actual,
                reporter: reporter.to_string(),
            },
        ))
    }

    /// Document-level reference graph: each document points at the documents
    /// its latest version references.
    pub fn reference_graph(&self) -> BTreeMap<DocId, BTreeSet<DocId>> {
        self.documents
            .values()
            .map(|r| {
                let targets = r
                    .latest()
                    .map(|v| v.refs.iter().map(|p| p.doc_id.clone()).collect())
                    .unwrap_or_default();
                (r.doc_id.clone(), targets)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn id(s: &str) -> DocId {
        DocId::new(s).unwrap()
    }

    fn manifest(doc: &str, version: &str, refs: &[(&str, &str)]) -> Manifest {
        Manifest {
            doc_id: id(doc),
            version: version.parse().unwrap(),
            src: "rev".into(),
            refs: refs
                .iter()
                .map(|(d, v)| Pin {
                    doc_id: id(d),
                    version: v.parse().unwrap(),
                })
                .collect(),
            artifacts: vec![],
            build_location: Some(format!("https://docs.example.org/{doc}/{version}/")),
        }
    }

    fn status(r: &Registry, doc: &str) -> Status {
        r.get(&id(doc)).unwrap().status
    }

    #[test]
    fn register() {
        let mut r = Registry::new();
        let rec = r.register_document(&id("icd-a")).unwrap();
        assert_eq!(rec.status, Status::Draft);
        assert!(rec.versions.is_empty());
        assert_eq!(
            r.register_document(&id("icd-a")),
            Err(TrackerError::AlreadyRegistered(id("icd-a")))
        );
        assert!(DocId::new("bad id!").is_err());
        assert_eq!(r.events().len(), 1);
    }

    #[test]
    fn revision_required_scenario() {
        let mut r = Registry::new();
        r.register_document(&id("icd-a")).unwrap();
        r.register_document(&id("icd-b")).unwrap();
        r.record_publication(&manifest("icd-a", "1.0", &[]))
            .unwrap();
        r.record_publication(&manifest("icd-a", "1.1", &[]))
            .unwrap();
        let changed = r
            .record_publication(&manifest("icd-b", "1.0", &[("icd-a", "1.1")]))
            .unwrap();
        assert_eq!(changed.len(), 1);
        assert_eq!(status(&r, "icd-a"), Status::Published);
        assert_eq!(status(&r, "icd-b"), Status::Published);

        let changed = r
            .record_publication(&manifest("icd-a", "1.2", &[]))
            .unwrap();
        assert_eq!(changed.len(), 1);
        assert_eq!(changed[0].doc_id, id("icd-b"));
        assert_eq!(changed[0].to, Status::RevisionRequired);
        let b = r.get(&id("icd-b")).unwrap();
        assert!(b.status_reason.contains("icd-a 1.1"), "{}", b.status_reason);
        assert!(b.status_reason.contains("1.2"));
        assert!(r.recompute_statuses().is_empty());

        r.record_publication(&manifest("icd-b", "1.1", &[("icd-a", "1.2")]))
            .unwrap();
        assert_eq!(status(&r, "icd-b"), Status::Published);
    }

    #[test]
    fn publication_errors() {
        let mut r = Registry::new();
        r.register_document(&id("a")).unwrap();
        r.register_document(&id("b")).unwrap();
        r.record_publication(&manifest("a", "1.0", &[])).unwrap();
        assert!(matches!(
            r.record_publication(&manifest("a", "1.0", &[])),
            Err(TrackerError::NonIncreasingVersion { .. })
        ));
        assert!(matches!(
            r.record_publication(&manifest("a", "0.9", &[])),
            Err(TrackerError::NonIncreasingVersion { .. })
        ));
        assert_eq!(
            r.record_publication(&manifest("b", "1.0", &[("a", "2.0")])),
            Err(TrackerError::DanglingRef(id("a"), "2.0".parse().unwrap()))
        );
        assert_eq!(
            r.record_publication(&manifest("b", "1.0", &[("b", "1.0")])),
            Err(TrackerError::SelfReference(id("b")))
        );
        assert_eq!(
            r.record_publication(&manifest("c", "1.0", &[])),
            Err(TrackerError::UnknownDocument(id("c")))
        );
        let mut m = manifest("b", "1.0", &[]);
        m.build_location = None;
        assert_eq!(
            r.record_publication(&m),
            Err(TrackerError::EmptyBuildLocation)
        );
        assert!(r.get(&id("b")).unwrap().versions.is_empty());
    }

    #[test]
    fn cycles_rejected() {
        let mut r = Registry::new();
        for d in ["a", "b", "c"] {
            r.register_document(&id(d)).unwrap();
        }
        r.record_publication(&manifest("a", "1.0", &[])).unwrap();
        r.record_publication(&manifest("b", "1.0", &[("a", "1.0")]))
            .unwrap();
        let err = r
            .record_publication(&manifest("a", "1.1", &[("b", "1.0")]))
            .unwrap_err();
        assert_eq!(err, TrackerError::Cycle(vec![id("a"), id("b"), id("a")]));

        r.record_publication(&manifest("c", "1.0", &[("b", "1.0")]))
            .unwrap();
        let err = r
            .record_publication(&manifest("a", "1.1", &[("c", "1.0")]))
            .unwrap_err();
        assert_eq!(err.to_string(), "reference cycle: a -> c -> b -> a");
        assert_eq!(r.get(&id("a")).unwrap().versions.len(), 1);
    }

    #[test]
    fn build_and_check_failures() {
        let mut r = Registry::new();
        r.register_document(&id("a")).unwrap();
        assert_eq!(
            r.record_build_failure(&id("a"), "RDL-C1").unwrap().status,
            Status::Failed
        );
        r.record_publication(&manifest("a", "1.0", &[])).unwrap();
        assert_eq!(status(&r, "a"), Status::Published);
        r.record_build_failure(&id("a"), "gate").unwrap();
        assert_eq!(status(&r, "a"), Status::Failed);
        assert_eq!(r.get(&id("a")).unwrap().versions.len(), 1);
        assert!(r.recompute_statuses().is_empty());
        r.record_publication(&manifest("a", "1.1", &[])).unwrap();
        assert_eq!(status(&r, "a"), Status::Published);

        let d1 = icdoc_core::rdl::digest(b"1");
        let d2 = icdoc_core::rdl::digest(b"2");
        let e1 = r
            .report_check_failure(&id("a"), "a.h", d1.clone(), d2.clone(), "dev")
            .unwrap();
        let e2 = r
            .report_check_failure(&id("a"), "a.h", d1.clone(), d2.clone(), "dev")
            .unwrap();
        assert!(e2.seq > e1.seq);
        assert_eq!(status(&r, "a"), Status::Published);
        assert!(r
            .report_check_failure(&id("zz"), "a.h", d1, d2, "dev")
            .is_err());
        assert_eq!(
            r.record_build_failure(&id("zz"), "x"),
            Err(TrackerError::UnknownDocument(id("zz")))
        );
    }

    #[test]
    fn event_json_shape() {
        let mut r = Registry::new();
        r.register_document(&id("a")).unwrap();
        let e = r
            .report_check_failure(
                &id("a"),
                "a.h",
                icdoc_core::rdl::digest(b""),
                icdoc_core::rdl::digest(b"abc"),
                "ci",
            )
            .unwrap();
        let v = serde_json::to_value(&e).unwrap();
        assert_eq!(v["kind"], "CHECK_FAILED");
        assert_eq!(v["seq"], 2);
        assert_eq!(v["reporter"], "ci");
        let back: TrackerEvent = serde_json::from_value(v).unwrap();
        assert_eq!(back, e);
    }
}
