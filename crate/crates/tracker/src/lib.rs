//! Central registry of ICDs.
//!
//! Tracks every published version of every document with its pinned
//! references, artifact digests and canonical location, and derives a status
//! per document:
//!
//! * `DRAFT`: registered, nothing published yet.
//! * `PUBLISHED`: latest version pins only current versions.
//! * `REVISION_REQUIRED`: latest version pins a version that has since been
//!   superseded.
//! * `FAILED`: the last publication attempt failed its gates. Cleared by the
//!   next successful publication.
//!
//! The registry is exposed over HTTP ([`server`]) and persisted to a single
//! JSON state file ([`store`]):
//!
//! ```json
//! {
//!   "documents": { "<doc-id>": { "doc_id", "versions": [...], "status", "status_reason" } },
//!   "events": [ { "seq", "doc_id", "at", "kind", ...payload } ]
//! }
//! ```

mod client;
mod registry;
pub mod server;
pub mod store;

pub use client::{ClientError, TrackerClient};
pub use registry::{
    DocumentRecord, EventKind, Registry, Status, StatusChange, TrackerError, TrackerEvent,
    VersionRecord,
};
pub use server::{DocumentView, ServerHandle};
