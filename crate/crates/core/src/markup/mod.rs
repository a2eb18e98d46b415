//! ICDML: the ICD markup language.
//!
//! A deliberately small, line-oriented grammar:
//!
//! ```text
//! = Title
//! :doc-id: icd-a
//! :version: 1.1
//!
//! == Section
//!
//! Paragraph with link:spec.txt[a link], term:ADC[] and icdref:icd-b[1.0].
//!
//! * list item
//!
//! glossary::[]
//!
//! [rdl]
//! ----
//! addrmap M { ... };
//! ----
//! ```

mod expand;
mod extract;
mod glossary;
mod history;
mod parse;
mod render;
mod version;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub use expand::{expand_macros, RefTable};
pub use extract::{extract_abbreviations, extract_external_links, extract_links, plain_text};
pub use glossary::{parse_glossary, Glossary, GlossaryConflict, GlossaryEntry, Origin};
pub use history::{parse_history, HistoryEntry};
pub use parse::parse_document;
pub(crate) use render::term_anchor;
pub use render::{escape_html, heading_anchors, render, slugify};
pub use version::{Version, VersionError};

/// Identifier of an ICD: `[A-Za-z][A-Za-z0-9_-]*`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DocId(String);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid doc-id '{0}': must match [A-Za-z][A-Za-z0-9_-]*")]
pub struct DocIdError(pub String);

impl DocId {
    pub fn new(id: impl Into<String>) -> Result<Self, DocIdError> {
        let id = id.into();
        if Self::is_valid(&id) {
            Ok(DocId(id))
        } else {
            Err(DocIdError(id))
        }
    }

    pub fn is_valid(id: &str) -> bool {
        let mut chars = id.chars();
        matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
            && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for DocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for DocId {
    type Err = DocIdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        DocId::new(s)
    }
}

impl AsRef<str> for DocId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for DocId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for DocId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        DocId::new(s).map_err(serde::de::Error::custom)
    }
}

/// A parsed ICD.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub title: String,
    /// Header attributes in source order, including `doc-id` and `version`.
    pub attributes: Vec<(String, String)>,
    pub doc_id: DocId,
    pub version: Version,
    pub blocks: Vec<Block>,
}

impl Document {
    pub fn attribute(&self, name: &str) -> Option<&str> {
        self.attributes
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_str())
    }

    /// Raw text of every rdl-block, in document order, paired with the line
    /// of its first content line.
    pub fn rdl_sources(&self) -> impl Iterator<Item = (&str, usize)> {
        self.blocks.iter().filter_map(|b| match &b.kind {
            BlockKind::Rdl { source, fence } => Some((source.as_str(), fence.0 + 1)),
            _ => None,
        })
    }

    /// Every inline node of every paragraph, list item and heading.
    pub fn inlines(&self) -> impl Iterator<Item = &Inline> {
        self.blocks.iter().flat_map(|b| b.inline_groups()).flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    /// 1-based source line where the block starts.
    pub line: usize,
}

impl Block {
    /// The inline sequences carried by this block (one per paragraph, heading
    /// or list item).
    pub fn inline_groups(&self) -> Vec<&[Inline]> {
        match &self.kind {
            BlockKind::Heading { inlines, .. } | BlockKind::Paragraph { inlines, .. } => {
                vec![inlines.as_slice()]
            }
            BlockKind::List { items } => items.iter().map(|i| i.inlines.as_slice()).collect(),
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockKind {
    /// Section heading, levels 1 to 5.
    Heading {
        level: u8,
        inlines: Vec<Inline>,
    },
    /// `text` is the paragraph source (lines joined with `\n`); inline spans
    /// index into it by character.
    Paragraph {
        text: String,
        inlines: Vec<Inline>,
    },
    List {
        items: Vec<ListItem>,
    },
    /// A block macro that has not been expanded yet.
    Macro(BlockMacro),
    /// Raw register description plus the lines of its opening and closing
    /// fences.
    Rdl {
        source: String,
        fence: (usize, usize),
    },
    /// Expansion of `glossary::[]`.
    GlossarySection {
        entries: Vec<GlossaryItem>,
    },
    /// Expansion of `doclog::[]`, newest entry first.
    DocLog {
        rows: Vec<HistoryEntry>,
    },
    /// Expansion of `references::[]`.
    References {
        entries: Vec<ReferenceItem>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockMacro {
    Glossary,
    DocLog,
    References,
}

impl BlockMacro {
    pub fn name(self) -> &'static str {
        match self {
            BlockMacro::Glossary => "glossary",
            BlockMacro::DocLog => "doclog",
            BlockMacro::References => "references",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "glossary" => Some(BlockMacro::Glossary),
            "doclog" => Some(BlockMacro::DocLog),
            "references" => Some(BlockMacro::References),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ListItem {
    pub text: String,
    pub inlines: Vec<Inline>,
    pub line: usize,
}

/// One entry of an expanded glossary section. `definition` is `None` when the
/// term is referenced but missing from the merged glossary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlossaryItem {
    pub term: String,
    pub definition: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceItem {
    pub doc_id: DocId,
    pub version: Version,
    pub resolution: RefResolution,
}

/// Where an `icdref:` points after expansion.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum RefResolution {
    /// Not looked up (no registry available).
    #[default]
    Unchecked,
    /// Canonical location of the referenced version.
    Resolved(String),
    /// Looked up and not found as a published version.
    Unresolved,
}

/// Character offsets `[start, end)` within the enclosing paragraph, heading or
/// list item text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inline {
    pub kind: InlineKind,
    pub span: Span,
    /// Source line on which the node starts.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum InlineKind {
    Text(String),
    Link {
        target: String,
        label: String,
    },
    TermRef {
        term: String,
    },
    IcdRef {
        doc_id: DocId,
        version: Version,
        resolution: RefResolution,
    },
}

/// Whether a link target points outside the document tree (`scheme://...` or
/// `mailto:`).
pub fn is_external_target(target: &str) -> bool {
    if target.starts_with("mailto:") {
        return true;
    }
    match target.find("://") {
        Some(i) => {
            i > 0
                && target[..i]
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
        }
        None => false,
    }
}
