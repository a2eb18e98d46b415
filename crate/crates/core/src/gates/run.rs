use std::collections::{BTreeMap, BTreeSet};

use super::sentences::sentence_spans;
use super::{ConfigError, GateConfig, GateReport, Location, RuleId, Violation};
use crate::markup::{
    extract_abbreviations, heading_anchors, is_external_target, plain_text, BlockKind, Document,
    Glossary, Inline, InlineKind, RefResolution,
};
use crate::rdl::{validate_rdl, RegisterMap};

/// Answers whether a link target exists. Fragment-only targets (`#id`) never
/// reach the resolver; they are checked against the document's own anchors.
pub trait LinkResolver {
    fn exists(&self, target: &str) -> bool;
}

impl<F: Fn(&str) -> bool> LinkResolver for F {
    fn exists(&self, target: &str) -> bool {
        self(target)
    }
}

const CONTEXT_CHARS: usize = 60;

fn snippet(text: &str) -> String {
    let flat: String = text.split_whitespace().collect::<Vec<_>>().join(" ");
    if flat.chars().count() <= CONTEXT_CHARS {
        flat
    } else {
        let mut s: String = flat.chars().take(CONTEXT_CHARS).collect();
        s.push_str("...");
        s
    }
}

struct Collector<'a> {
    config: &'a GateConfig,
    out: Vec<Violation>,
}

impl Collector<'_> {
    fn push(&mut self, rule: RuleId, line: usize, context: &str, message: String) {
        self.out.push(Violation {
            rule_id: rule,
            severity: self.config.severity(rule),
            location: Location {
                line,
                context: snippet(context),
            },
            message,
        });
    }
}

/// Evaluate every gate over an expanded document and its register maps.
///
/// Fails only when `config` is invalid; problems in the content are always
/// reported as violations.
pub fn run_gates(
    doc: &Document,
    maps: &[RegisterMap],
    glossary: &Glossary,
    config: &GateConfig,
    resolver: &dyn LinkResolver,
) -> Result<GateReport, ConfigError> {
    config.validate()?;
    let mut c = Collector {
        config,
        out: Vec::new(),
    };
    check_links(doc, config, resolver, &mut c);
    check_abbreviations(doc, glossary, config, &mut c);
    check_style(doc, config, &mut c);
    for conflict in glossary.conflicts() {
        c.push(
            RuleId::Gloss1,
            conflict.line,
            &conflict.rejected,
            format!(
                "local glossary redefines '{}' (central definition: '{}')",
                conflict.term,
                snippet(&conflict.kept)
            ),
        );
    }
    check_sections(doc, config, &mut c);
    check_refs(doc, &mut c);
    for map in maps {
        for v in validate_rdl(map, &config.required_field_props) {
            c.push(RuleId::Rdl(v.rule), v.line, &v.message, v.message.clone());
        }
    }
    Ok(GateReport::new(c.out, config.max_warnings))
}

fn check_links(
    doc: &Document,
    config: &GateConfig,
    resolver: &dyn LinkResolver,
    c: &mut Collector,
) {
    let mut anchors: BTreeSet<String> = heading_anchors(doc).into_iter().collect();
    for block in &doc.blocks {
        if let BlockKind::GlossarySection { entries } = &block.kind {
            anchors.extend(entries.iter().map(|e| crate::markup::term_anchor(&e.term)));
        }
    }
    for node in doc.inlines() {
        let InlineKind::Link { target, .. } = &node.kind else {
            continue;
        };
        let ok = if let Some(fragment) = target.strip_prefix('#') {
            anchors.contains(fragment)
        } else if is_external_target(target) {
            !config.check_external_links || resolver.exists(target)
        } else {
            let path = target.split('#').next().unwrap_or(target);
            resolver.exists(path)
        };
        if !ok {
            c.push(
                RuleId::Link1,
                node.line,
                target,
                format!("broken link '{target}'"),
            );
        }
    }
}

fn check_abbreviations(
    doc: &Document,
    glossary: &Glossary,
    config: &GateConfig,
    c: &mut Collector,
) {
    let mut first: BTreeMap<String, usize> = BTreeMap::new();
    let mut note = |token: &str, line: usize| {
        let e = first.entry(token.to_string()).or_insert(line);
        *e = (*e).min(line);
    };
    for (token, line) in extract_abbreviations(doc) {
        note(&token, line);
    }
    for node in doc.inlines() {
        if let InlineKind::TermRef { term } = &node.kind {
            note(term, node.line);
        }
    }
    for (token, line) in first {
        if glossary.contains(&token) || config.abbreviation_allowlist.contains(&token) {
            continue;
        }
        c.push(
            RuleId::Abbr1,
            line,
            &token,
            format!("'{token}' is not defined in the glossary"),
        );
    }
}

/// Reader-visible text of an inline group plus the source line where each
/// sentence starts.
fn sentences(inlines: &[Inline]) -> Vec<(String, usize)> {
    let Some(first) = inlines.first() else {
        return Vec::new();
    };
    let text = plain_text(inlines);
    sentence_spans(&text)
        .into_iter()
        .map(|(a, b)| {
            let line = first.line + text[..a].matches('\n').count();
            (text[a..b].to_string(), line)
        })
        .collect()
}

fn check_style(doc: &Document, config: &GateConfig, c: &mut Collector) {
    let phrases: Vec<String> = config
        .forbidden_phrases
        .iter()
        .map(|p| {
            p.split_whitespace()
                .collect::<Vec<_>>()
                .join(" ")
                .to_lowercase()
        })
        .collect();
    for block in &doc.blocks {
        let groups: Vec<&[Inline]> = match &block.kind {
            BlockKind::Paragraph { inlines, .. } => vec![inlines],
            BlockKind::List { items } => items.iter().map(|i| i.inlines.as_slice()).collect(),
            _ => continue,
        };
        for group in groups {
            for (sentence, line) in sentences(group) {
                let words = sentence.split_whitespace().count();
                if words > config.max_sentence_words {
                    c.push(
                        RuleId::Style1,
                        line,
                        &sentence,
                        format!(
                            "sentence has {words} words (limit {})",
                            config.max_sentence_words
                        ),
                    );
                }
                let normalized = format!(
                    " {} ",
                    sentence
                        .split_whitespace()
                        .collect::<Vec<_>>()
                        .join(" ")
                        .to_lowercase()
                );
                for phrase in &phrases {
                    if contains_phrase(&normalized, phrase) {
                        c.push(
                            RuleId::Style2,
                            line,
                            &sentence,
                            format!("forbidden phrase '{phrase}'"),
                        );
                    }
                }
            }
        }
    }
}

/// Whole-word phrase match; `haystack` is padded with spaces.
fn contains_phrase(haystack: &str, phrase: &str) -> bool {
    haystack.match_indices(phrase).any(|(i, _)| {
        let before = haystack[..i].chars().next_back();
        let after = haystack[i + phrase.len()..].chars().next();
        before.is_none_or(|ch| !ch.is_alphanumeric())
            && after.is_none_or(|ch| !ch.is_alphanumeric())
    })
}

fn check_sections(doc: &Document, config: &GateConfig, c: &mut Collector) {
    let normalize = |s: &str| {
        s.split_whitespace()
            .collect::<Vec<_>>()
            .join(" ")
            .to_lowercase()
    };
    let headings: BTreeSet<String> = doc
        .blocks
        .iter()
        .filter_map(|b| match &b.kind {
            BlockKind::Heading { inlines, .. } => Some(normalize(&plain_text(inlines))),
            _ => None,
        })
        .collect();
    for section in &config.required_sections {
        if !headings.contains(&normalize(section)) {
            c.push(
                RuleId::Meta1,
                1,
                section,
                format!("missing required section '{section}'"),
            );
        }
    }
}

fn check_refs(doc: &Document, c: &mut Collector) {
    for node in doc.inlines() {
        if let InlineKind::IcdRef {
            doc_id,
            version,
            resolution: RefResolution::Unresolved,
        } = &node.kind
        {
            c.push(
                RuleId::Ref1,
                node.line,
                &format!("{doc_id} {version}"),
                format!("{doc_id} {version} is not a published version in the registry"),
            );
        }
    }
}
