use std::collections::BTreeMap;

use crate::ParseError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Origin {
    Central,
    Local,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlossaryEntry {
    pub definition: String,
    pub origin: Origin,
}

/// A local entry that redefines a term already present with a different
/// definition. The earlier (central) definition is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlossaryConflict {
    pub term: String,
    pub kept: String,
    pub rejected: String,
    /// Line of the rejected entry in its local glossary file.
    pub line: usize,
}

/// Merged central + local glossary. Term names are case-sensitive.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Glossary {
    entries: BTreeMap<String, GlossaryEntry>,
    conflicts: Vec<GlossaryConflict>,
}

/// One `TERM<TAB>definition` line of a glossary file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlossaryLine {
    pub term: String,
    pub definition: String,
    pub line: usize,
}

/// Parse a glossary file. Blank lines and lines starting with `#` are
/// skipped; a term may appear only once per file.
pub fn parse_glossary(text: &str) -> Result<Vec<GlossaryLine>, ParseError> {
    let mut out: Vec<GlossaryLine> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() || raw.starts_with('#') {
            continue;
        }
        let (term, definition) = raw
            .split_once('\t')
            .ok_or_else(|| ParseError::new(line, "expected 'TERM<TAB>definition'"))?;
        let term = term.trim();
        if term.is_empty() {
            return Err(ParseError::new(line, "empty glossary term"));
        }
        if out.iter().any(|e| e.term == term) {
            return Err(ParseError::new(
                line,
                format!("duplicate glossary term '{term}'"),
            ));
        }
        out.push(GlossaryLine {
            term: term.to_string(),
            definition: definition.trim().to_string(),
            line,
        });
    }
    Ok(out)
}

impl Glossary {
    pub fn central(lines: Vec<GlossaryLine>) -> Self {
        let entries = lines
            .into_iter()
            .map(|l| {
                (
                    l.term,
                    GlossaryEntry {
                        definition: l.definition,
                        origin: Origin::Central,
                    },
                )
            })
            .collect();
        Glossary {
            entries,
            conflicts: Vec::new(),
        }
    }

    /// Add document-specific entries. New terms are added; a term that
    /// already exists with a different definition is recorded as a conflict
    /// and the existing definition wins.
    pub fn merge_local(&mut self, lines: Vec<GlossaryLine>) {
        for l in lines {
            match self.entries.get(&l.term) {
                Some(existing) if existing.definition != l.definition => {
                    self.conflicts.push(GlossaryConflict {
                        term: l.term,
                        kept: existing.definition.clone(),
                        rejected: l.definition,
                        line: l.line,
                    });
                }
                Some(_) => {}
                None => {
                    self.entries.insert(
                        l.term,
                        GlossaryEntry {
                            definition: l.definition,
                            origin: Origin::Local,
                        },
                    );
                }
            }
        }
    }

    pub fn get(&self, term: &str) -> Option<&GlossaryEntry> {
        self.entries.get(term)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.entries.contains_key(term)
    }

    pub fn entries(&self) -> &BTreeMap<String, GlossaryEntry> {
        &self.entries
    }

    pub fn conflicts(&self) -> &[GlossaryConflict] {
        &self.conflicts
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
