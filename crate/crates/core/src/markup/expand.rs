use std::collections::{BTreeMap, BTreeSet};

use super::{
    BlockKind, BlockMacro, DocId, Document, Glossary, GlossaryItem, HistoryEntry, InlineKind,
    RefResolution, ReferenceItem, Version,
};

/// Canonical locations of the ICD versions a document may reference.
///
/// An unchecked table (no registry available) leaves every reference
/// [`RefResolution::Unchecked`]; a checked table marks misses as
/// [`RefResolution::Unresolved`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RefTable {
    locations: BTreeMap<(DocId, Version), String>,
    checked: bool,
}

impl RefTable {
    pub fn unchecked() -> Self {
        RefTable::default()
    }

    pub fn checked() -> Self {
        RefTable {
            locations: BTreeMap::new(),
            checked: true,
        }
    }

    pub fn insert(&mut self, doc_id: DocId, version: Version, location: impl Into<String>) {
        self.locations.insert((doc_id, version), location.into());
    }

    pub fn resolve(&self, doc_id: &DocId, version: &Version) -> RefResolution {
        match self.locations.get(&(doc_id.clone(), *version)) {
            Some(loc) => RefResolution::Resolved(loc.clone()),
            None if self.checked => RefResolution::Unresolved,
            None => RefResolution::Unchecked,
        }
    }
}

/// Expand `glossary::[]`, `doclog::[]` and `references::[]` and attach
/// resolutions to every `icdref:`.
///
/// Missing glossary terms and unresolved references are kept in the output,
/// marked, for the gates to report. Expanding an expanded document with the
/// same inputs yields the same document.
pub fn expand_macros(
    doc: &Document,
    glossary: &Glossary,
    history: &[HistoryEntry],
    refs: &RefTable,
) -> Document {
    let mut out = doc.clone();

    for block in &mut out.blocks {
        let groups: Vec<&mut Vec<super::Inline>> = match &mut block.kind {
            BlockKind::Heading { inlines, .. } | BlockKind::Paragraph { inlines, .. } => {
                vec![inlines]
            }
            BlockKind::List { items } => items.iter_mut().map(|i| &mut i.inlines).collect(),
            _ => Vec::new(),
        };
        for node in groups.into_iter().flatten() {
            if let InlineKind::IcdRef {
                doc_id,
                version,
                resolution,
            } = &mut node.kind
            {
                *resolution = refs.resolve(doc_id, version);
            }
        }
    }

    let terms: BTreeSet<&str> = doc
        .inlines()
        .filter_map(|n| match &n.kind {
            InlineKind::TermRef { term } => Some(term.as_str()),
            _ => None,
        })
        .collect();
    let glossary_entries: Vec<GlossaryItem> = terms
        .into_iter()
        .map(|term| GlossaryItem {
            term: term.to_string(),
            definition: glossary.get(term).map(|e| e.definition.clone()),
        })
        .collect();

    let mut rows = history.to_vec();
    rows.sort_by_key(|r| std::cmp::Reverse(r.version));

    let cited: BTreeSet<(&DocId, &Version)> = doc
        .inlines()
        .filter_map(|n| match &n.kind {
            InlineKind::IcdRef {
                doc_id, version, ..
            } => Some((doc_id, version)),
            _ => None,
        })
        .collect();
    let references: Vec<ReferenceItem> = cited
        .into_iter()
        .map(|(doc_id, version)| ReferenceItem {
            doc_id: doc_id.clone(),
            version: *version,
            resolution: refs.resolve(doc_id, version),
        })
        .collect();

    for block in &mut out.blocks {
        let which = match &block.kind {
            BlockKind::Macro(m) => *m,
            BlockKind::GlossarySection { .. } => BlockMacro::Glossary,
            BlockKind::DocLog { .. } => BlockMacro::DocLog,
            BlockKind::References { .. } => BlockMacro::References,
            _ => continue,
        };
        block.kind = match which {
            BlockMacro::Glossary => BlockKind::GlossarySection {
                entries: glossary_entries.clone(),
            },
            BlockMacro::DocLog => BlockKind::DocLog { rows: rows.clone() },
            BlockMacro::References => BlockKind::References {
                entries: references.clone(),
            },
        };
    }
    out
}
