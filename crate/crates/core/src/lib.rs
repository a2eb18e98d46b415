//! Core of the `icdoc` toolchain.
//!
//! * [`markup`] parses ICD source documents (the ICDML grammar), expands the
//!   content-generating block macros and renders a single-file HTML document.
//! * [`rdl`] handles the embedded register descriptions: parsing,
//!   completeness validation, register tables, C headers and checksums.
//! * [`gates`] evaluates the documentation quality gates and produces the
//!   report that decides whether a document may be published.
//! * [`manifest`] is the publication record shared by the pipeline and the
//!   tracker.
//!
//! Everything in this crate is a pure function of its inputs.

pub mod error;
pub mod gates;
pub mod manifest;
pub mod markup;
pub mod rdl;

pub use error::ParseError;
pub use manifest::{document_refs, ArtifactEntry, Manifest, ManifestError, Pin};
pub use markup::{DocId, Document, Version};
pub use rdl::Digest;

/// Whether a build is an author iteration or an official publication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuildMode {
    Draft,
    Publish,
}
