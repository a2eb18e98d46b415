use std::collections::BTreeMap;
use std::fmt::Write;

use super::{BlockKind, Document, Inline, InlineKind, RefResolution};
use crate::rdl::RegisterTables;

const STYLE: &str = "body{font-family:sans-serif;max-width:60em;margin:2em auto;line-height:1.4}\
table{border-collapse:collapse;margin:0.5em 0}\
th,td{border:1px solid #999;padding:0.2em 0.5em;text-align:left}\
.unresolved,.undefined{color:#b00}\
dt{font-weight:bold}";

/// Escape text for HTML element content and attribute values.
pub fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Heading anchor: lowercase alphanumerics separated by single dashes.
pub fn slugify(text: &str) -> String {
    let mut slug = String::new();
    for c in text.chars().flat_map(char::to_lowercase) {
        if c.is_alphanumeric() {
            slug.push(c);
        } else if !slug.is_empty() && !slug.ends_with('-') {
            slug.push('-');
        }
    }
    while slug.ends_with('-') {
        slug.pop();
    }
    if slug.is_empty() {
        slug.push_str("section");
    }
    slug
}

/// Anchor of a glossary term. Terms are case-sensitive, so the id keeps case
/// and hex-encodes anything outside `[A-Za-z0-9_-]`.
pub(crate) fn term_anchor(term: &str) -> String {
    let mut id = String::from("term-");
    for c in term.chars() {
        if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
            id.push(c);
        } else {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                let _ = write!(id, ".{b:02x}");
            }
        }
    }
    id
}

fn render_inlines(out: &mut String, inlines: &[Inline]) {
    for node in inlines {
        match &node.kind {
            InlineKind::Text(t) => out.push_str(&escape_html(t)),
            InlineKind::Link { target, label } => {
                let label = if label.is_empty() { target } else { label };
                let _ = write!(
                    out,
                    "<a href=\"{}\">{}</a>",
                    escape_html(target),
                    escape_html(label)
                );
            }
            InlineKind::TermRef { term } => {
                let _ = write!(
                    out,
                    "<a class=\"term\" href=\"#{}\">{}</a>",
                    escape_html(&term_anchor(term)),
                    escape_html(term)
                );
            }
            InlineKind::IcdRef {
                doc_id,
                version,
                resolution,
            } => {
                let text = escape_html(&format!("{doc_id} {version}"));
                match resolution {
                    RefResolution::Resolved(loc) => {
                        let _ = write!(
                            out,
                            "<a class=\"icd-ref\" href=\"{}\">{text}</a>",
                            escape_html(loc)
                        );
                    }
                    RefResolution::Unresolved => {
                        let _ = write!(out, "<span class=\"icd-ref unresolved\">{text}</span>");
                    }
                    RefResolution::Unchecked => {
                        let _ = write!(out, "<span class=\"icd-ref\">{text}</span>");
                    }
                }
            }
        }
    }
}

/// Render an expanded document to a self-contained HTML page.
///
/// The `id` of every heading in document order. Repeated slugs get a `-2`,
/// `-3`, ... suffix.
pub fn heading_anchors(doc: &Document) -> Vec<String> {
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for block in &doc.blocks {
        if let BlockKind::Heading { inlines, .. } = &block.kind {
            let base = slugify(&super::plain_text(inlines));
            let n = seen.entry(base.clone()).or_insert(0);
            *n += 1;
            out.push(if *n == 1 { base } else { format!("{base}-{n}") });
        }
    }
    out
}

/// `register_tables` holds one entry per rdl-block, in document order; each
/// rdl-block is replaced by its tables. The output depends only on the
/// arguments.
pub fn render(doc: &Document, register_tables: &[RegisterTables]) -> Vec<u8> {
    let mut out = String::new();
    out.push_str("<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n");
    let _ = writeln!(
        out,
        "<meta name=\"icdoc-doc-id\" content=\"{}\">\n<meta name=\"icdoc-version\" content=\"{}\">",
        escape_html(doc.doc_id.as_str()),
        doc.version
    );
    let _ = writeln!(out, "<title>{}</title>", escape_html(&doc.title));
    let _ = writeln!(out, "<style>{STYLE}</style>\n</head>\n<body>");
    let _ = writeln!(out, "<h1>{}</h1>", escape_html(&doc.title));

    let mut anchors = heading_anchors(doc).into_iter();
    let mut tables = register_tables.iter();
    for block in &doc.blocks {
        match &block.kind {
            BlockKind::Heading { level, inlines } => {
                let id = anchors.next().unwrap_or_default();
                let _ = write!(out, "<h{level} id=\"{}\">", escape_html(&id));
                render_inlines(&mut out, inlines);
                let _ = writeln!(out, "</h{level}>");
            }
            BlockKind::Paragraph { inlines, .. } => {
                out.push_str("<p>");
                render_inlines(&mut out, inlines);
                out.push_str("</p>\n");
            }
            BlockKind::List { items } => {
                out.push_str("<ul>\n");
                for item in items {
                    out.push_str("<li>");
                    render_inlines(&mut out, &item.inlines);
                    out.push_str("</li>\n");
                }
                out.push_str("</ul>\n");
            }
            BlockKind::Macro(m) => {
                let _ = writeln!(
                    out,
                    "<div class=\"macro unexpanded\">{}::[]</div>",
                    m.name()
                );
            }
            BlockKind::Rdl { .. } => match tables.next() {
                Some(t) => out.push_str(&t.to_html()),
                None => out.push_str("<div class=\"register-map undefined\">(register description not available)</div>\n"),
            },
            BlockKind::GlossarySection { entries } => {
                out.push_str("<dl class=\"glossary\">\n");
                for e in entries {
                    let _ = write!(
                        out,
                        "<dt id=\"{}\">{}</dt>",
                        escape_html(&term_anchor(&e.term)),
                        escape_html(&e.term)
                    );
                    match &e.definition {
                        Some(d) => {
                            let _ = writeln!(out, "<dd>{}</dd>", escape_html(d));
                        }
                        None => out.push_str("<dd class=\"undefined\">(undefined term)</dd>\n"),
                    }
                }
                out.push_str("</dl>\n");
            }
            BlockKind::DocLog { rows } => {
                out.push_str("<table class=\"doclog\">\n<thead><tr><th>Version</th><th>Date</th><th>Author</th><th>Summary</th></tr></thead>\n<tbody>\n");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
                        r.version,
                        r.date.format("%Y-%m-%d"),
                        escape_html(&r.author),
                        escape_html(&r.summary)
                    );
                }
                out.push_str("</tbody>\n</table>\n");
            }
            BlockKind::References { entries } => {
                out.push_str("<ul class=\"references\">\n");
                for e in entries {
                    let label = escape_html(&format!("{} {}", e.doc_id, e.version));
                    match &e.resolution {
                        RefResolution::Resolved(loc) => {
                            let _ = writeln!(
                                out,
                                "<li>{label} \u{2014} <a href=\"{0}\">{0}</a></li>",
                                escape_html(loc)
                            );
                        }
                        RefResolution::Unresolved => {
                            let _ = writeln!(out, "<li class=\"unresolved\">{label} \u{2014} (unresolved)</li>");
                        }
                        RefResolution::Unchecked => {
                            let _ = writeln!(out, "<li>{label} \u{2014} (not checked)</li>");
                        }
                    }
                }
                out.push_str("</ul>\n");
            }
        }
    }
    out.push_str("</body>\n</html>\n");
    out.into_bytes()
}
