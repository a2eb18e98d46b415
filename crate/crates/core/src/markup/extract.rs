use std::collections::BTreeSet;
use std::sync::OnceLock;

use regex::Regex;

use super::{is_external_target, Document, Inline, InlineKind};

/// Local link targets with the line they appear on, in source order.
/// External URLs are left out; see [`extract_external_links`].
pub fn extract_links(doc: &Document) -> Vec<(String, usize)> {
    links(doc, false)
}

/// `scheme://` and `mailto:` link targets, in source order.
pub fn extract_external_links(doc: &Document) -> Vec<(String, usize)> {
    links(doc, true)
}

fn links(doc: &Document, external: bool) -> Vec<(String, usize)> {
    doc.inlines()
        .filter_map(|node| match &node.kind {
            InlineKind::Link { target, .. } if is_external_target(target) == external => {
                Some((target.clone(), node.line))
            }
            _ => None,
        })
        .collect()
}

fn abbreviation_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"\b[A-Z][A-Z0-9]+\b").expect("valid regex"))
}

/// All-caps tokens (`[A-Z][A-Z0-9]+`) in heading, paragraph and list text.
/// Term references, link targets, ICD references and register descriptions
/// are not scanned.
pub fn extract_abbreviations(doc: &Document) -> BTreeSet<(String, usize)> {
    let mut found = BTreeSet::new();
    for node in doc.inlines() {
        let text = match &node.kind {
            InlineKind::Text(t) => t,
            InlineKind::Link { label, .. } => label,
            _ => continue,
        };
        for m in abbreviation_re().find_iter(text) {
            let line = node.line + text[..m.start()].matches('\n').count();
            found.insert((m.as_str().to_string(), line));
        }
    }
    found
}

/// The reader-visible text of an inline sequence: link labels (or targets
/// when unlabelled), term names and `doc-id version` for ICD references.
pub fn plain_text(inlines: &[Inline]) -> String {
    let mut out = String::new();
    for node in inlines {
        match &node.kind {
            InlineKind::Text(t) => out.push_str(t),
            InlineKind::Link { target, label } => {
                out.push_str(if label.is_empty() { target } else { label })
            }
            InlineKind::TermRef { term } => out.push_str(term),
            InlineKind::IcdRef {
                doc_id, version, ..
            } => {
                out.push_str(doc_id.as_str());
                out.push(' ');
                out.push_str(&version.to_string());
            }
        }
    }
    out
}
