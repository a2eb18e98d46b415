use super::{
    Block, BlockKind, BlockMacro, DocId, Document, Inline, InlineKind, ListItem, RefResolution,
    Span, Version,
};
use crate::ParseError;

const INLINE_MACROS: [&str; 3] = ["link", "term", "icdref"];

/// Parse an ICDML source document.
///
/// Unknown macros, malformed header lines, unclosed rdl fences and missing
/// `doc-id`/`version` attributes are syntax errors.
pub fn parse_document(source: &str) -> Result<Document, ParseError> {
    let lines: Vec<&str> = source
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l))
        .collect();

    let title = lines
        .first()
        .and_then(|l| l.strip_prefix("= "))
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .ok_or_else(|| ParseError::new(1, "expected document title '= <title>' on line 1"))?
        .to_string();

    let mut attributes: Vec<(String, String)> = Vec::new();
    let mut attr_lines = Vec::new();
    let mut idx = 1;
    while idx < lines.len() && !lines[idx].trim().is_empty() {
        let line_no = idx + 1;
        let (name, value) = parse_attribute(lines[idx]).ok_or_else(|| {
            ParseError::new(
                line_no,
                "malformed header attribute, expected ':<name>: <value>'",
            )
        })?;
        if attributes.iter().any(|(n, _)| n == name) {
            return Err(ParseError::new(
                line_no,
                format!("duplicate attribute '{name}'"),
            ));
        }
        attributes.push((name.to_string(), value.to_string()));
        attr_lines.push(line_no);
        idx += 1;
    }

    let attr = |name: &str| {
        attributes
            .iter()
            .zip(&attr_lines)
            .find(|((n, _), _)| n == name)
            .map(|((_, v), line)| (v.as_str(), *line))
    };
    let (raw_id, id_line) =
        attr("doc-id").ok_or_else(|| ParseError::new(1, "missing required attribute doc-id"))?;
    let doc_id = DocId::new(raw_id).map_err(|e| ParseError::new(id_line, e.to_string()))?;
    let (raw_version, version_line) =
        attr("version").ok_or_else(|| ParseError::new(1, "missing required attribute version"))?;
    let version: Version = raw_version
        .parse()
        .map_err(|e: super::VersionError| ParseError::new(version_line, e.to_string()))?;

    let blocks = BodyParser { lines: &lines, idx }.parse()?;

    Ok(Document {
        title,
        attributes,
        doc_id,
        version,
        blocks,
    })
}

fn parse_attribute(line: &str) -> Option<(&str, &str)> {
    let rest = line.strip_prefix(':')?;
    let end = rest.find(':')?;
    let name = &rest[..end];
    if name.is_empty()
        || !name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
    {
        return None;
    }
    let value = &rest[end + 1..];
    if !value.is_empty() && !value.starts_with([' ', '\t']) {
        return None;
    }
    Some((name, value.trim()))
}

/// Classification of a body line that starts a block of its own.
enum LineStart<'a> {
    Heading(usize, &'a str),
    Macro(&'a str, &'a str),
    Attribute(&'a str),
    ListItem(&'a str),
}

fn classify(line: &str) -> Option<LineStart<'_>> {
    let trimmed = line.trim();
    if line.starts_with('=') {
        let level = line.chars().take_while(|&c| c == '=').count();
        let rest = &line[level..];
        if rest.starts_with(' ') || rest.is_empty() {
            return Some(LineStart::Heading(level, rest.trim()));
        }
    }
    if let Some(item) = line.strip_prefix("* ") {
        return Some(LineStart::ListItem(item));
    }
    if let Some(pos) = trimmed.find("::[") {
        let name = &trimmed[..pos];
        if is_identifier(name) {
            return Some(LineStart::Macro(name, &trimmed[pos + 2..]));
        }
    }
    if let Some(inner) = trimmed.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
        if is_identifier(inner) {
            return Some(LineStart::Attribute(inner));
        }
    }
    None
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

struct BodyParser<'a> {
    lines: &'a [&'a str],
    idx: usize,
}

impl BodyParser<'_> {
    fn line_no(&self) -> usize {
        self.idx + 1
    }

    fn parse(mut self) -> Result<Vec<Block>, ParseError> {
        let mut blocks = Vec::new();
        while self.idx < self.lines.len() {
            let line = self.lines[self.idx];
            if line.trim().is_empty() {
                self.idx += 1;
                continue;
            }
            let start = self.line_no();
            let kind = match classify(line) {
                Some(LineStart::Heading(level, text)) => {
                    if level > 5 {
                        return Err(ParseError::new(
                            start,
                            format!("heading level {level} exceeds the maximum of 5"),
                        ));
                    }
                    if text.is_empty() {
                        return Err(ParseError::new(start, "empty heading"));
                    }
                    self.idx += 1;
                    BlockKind::Heading {
                        level: level as u8,
                        inlines: parse_inlines(text, start)?,
                    }
                }
                Some(LineStart::Macro(name, args)) => {
                    let m = BlockMacro::from_name(name).ok_or_else(|| {
                        ParseError::new(start, format!("unknown block macro '{name}'"))
                    })?;
                    match args {
                        "[]" => {}
                        a if a.starts_with('[') && a.ends_with(']') => {
                            return Err(ParseError::new(
                                start,
                                format!("block macro '{name}' takes no arguments"),
                            ))
                        }
                        _ => {
                            return Err(ParseError::new(
                                start,
                                format!("malformed block macro '{name}', expected '{name}::[]'"),
                            ))
                        }
                    }
                    self.idx += 1;
                    BlockKind::Macro(m)
                }
                Some(LineStart::Attribute(name)) => {
                    if name != "rdl" {
                        return Err(ParseError::new(
                            start,
                            format!("unknown block attribute '[{name}]'"),
                        ));
                    }
                    self.rdl_block()?
                }
                Some(LineStart::ListItem(_)) => self.list()?,
                None => self.paragraph()?,
            };
            blocks.push(Block { kind, line: start });
        }
        Ok(blocks)
    }

    fn rdl_block(&mut self) -> Result<BlockKind, ParseError> {
        self.idx += 1;
        let open = self.line_no();
        if self.lines.get(self.idx).map(|l| l.trim()) != Some("----") {
            return Err(ParseError::new(open, "expected '----' fence after [rdl]"));
        }
        self.idx += 1;
        let body_start = self.idx;
        while self.idx < self.lines.len() {
            if self.lines[self.idx].trim() == "----" {
                let close = self.line_no();
                let source = self.lines[body_start..self.idx].join("\n");
                self.idx += 1;
                return Ok(BlockKind::Rdl {
                    source,
                    fence: (open, close),
                });
            }
            self.idx += 1;
        }
        Err(ParseError::new(open, "unclosed rdl fence"))
    }

    fn list(&mut self) -> Result<BlockKind, ParseError> {
        let mut items: Vec<(usize, Vec<&str>)> = Vec::new();
        while self.idx < self.lines.len() {
            let line = self.lines[self.idx];
            if line.trim().is_empty() {
                break;
            }
            match classify(line) {
                Some(LineStart::ListItem(text)) => items.push((self.line_no(), vec![text])),
                Some(_) => break,
                None => items
                    .last_mut()
                    .expect("list starts with an item")
                    .1
                    .push(line),
            }
            self.idx += 1;
        }
        let items = items
            .into_iter()
            .map(|(line, parts)| {
                let text = parts.join("\n");
                let inlines = parse_inlines(&text, line)?;
                Ok(ListItem {
                    text,
                    inlines,
                    line,
                })
            })
            .collect::<Result<_, ParseError>>()?;
        Ok(BlockKind::List { items })
    }

    fn paragraph(&mut self) -> Result<BlockKind, ParseError> {
        let start = self.line_no();
        let mut parts = Vec::new();
        while self.idx < self.lines.len() {
            let line = self.lines[self.idx];
            if line.trim().is_empty() || (!parts.is_empty() && classify(line).is_some()) {
                break;
            }
            parts.push(line);
            self.idx += 1;
        }
        let text = parts.join("\n");
        let inlines = parse_inlines(&text, start)?;
        Ok(BlockKind::Paragraph { text, inlines })
    }
}

/// Parse the inline content of one paragraph, heading or list item.
/// `first_line` is the source line of the first character of `text`.
pub(crate) fn parse_inlines(text: &str, first_line: usize) -> Result<Vec<Inline>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let line_at = |pos: usize| first_line + chars[..pos].iter().filter(|&&c| c == '\n').count();

    let mut nodes = Vec::new();
    let mut text_start = 0;
    let mut pos = 0;
    while pos < chars.len() {
        match macro_at(&chars, pos).map_err(|msg| ParseError::new(line_at(pos), msg))? {
            Some((kind, end)) => {
                if text_start < pos {
                    nodes.push(Inline {
                        kind: InlineKind::Text(chars[text_start..pos].iter().collect()),
                        span: Span {
                            start: text_start,
                            end: pos,
                        },
                        line: line_at(text_start),
                    });
                }
                nodes.push(Inline {
                    kind,
                    span: Span { start: pos, end },
                    line: line_at(pos),
                });
                pos = end;
                text_start = end;
            }
            None => pos += 1,
        }
    }
    if text_start < chars.len() {
        nodes.push(Inline {
            kind: InlineKind::Text(chars[text_start..].iter().collect()),
            span: Span {
                start: text_start,
                end: chars.len(),
            },
            line: line_at(text_start),
        });
    }
    Ok(nodes)
}

/// Try to read an inline macro `name:target[label]` starting at `pos`.
/// Returns the node and the end offset, `None` when `pos` does not start a
/// macro, or an error message for malformed or unknown macros.
fn macro_at(chars: &[char], pos: usize) -> Result<Option<(InlineKind, usize)>, String> {
    if pos > 0 {
        let prev = chars[pos - 1];
        if prev.is_alphanumeric() || matches!(prev, '_' | '-' | ':' | '/' | '.') {
            return Ok(None);
        }
    }
    let name_end = pos
        + chars[pos..]
            .iter()
            .take_while(|c| c.is_ascii_lowercase())
            .count();
    if name_end == pos || chars.get(name_end) != Some(&':') {
        return Ok(None);
    }
    let name: String = chars[pos..name_end].iter().collect();
    let target_start = name_end + 1;
    match chars.get(target_start) {
        None => return Ok(None),
        Some(c) if c.is_whitespace() => return Ok(None),
        _ => {}
    }
    let known = INLINE_MACROS.contains(&name.as_str());

    let mut i = target_start;
    while i < chars.len() && chars[i] != '[' {
        if chars[i].is_whitespace() || chars[i] == ']' {
            if known {
                return Err(format!(
                    "malformed inline macro '{name}:', expected '[' after target"
                ));
            }
            return Ok(None);
        }
        i += 1;
    }
    if i == chars.len() {
        if known {
            return Err(format!(
                "malformed inline macro '{name}:', expected '[' after target"
            ));
        }
        return Ok(None);
    }
    let target: String = chars[target_start..i].iter().collect();
    let label_start = i + 1;
    let Some(close) = chars[label_start..].iter().position(|&c| c == ']') else {
        if known {
            return Err(format!("unclosed '[' in inline macro '{name}:'"));
        }
        return Ok(None);
    };
    let label_end = label_start + close;
    let label: String = chars[label_start..label_end].iter().collect();
    let end = label_end + 1;

    if !known {
        // `scheme://host[...]` is prose, not a macro
        if name.len() < 2 || target.starts_with("//") || label.contains('[') {
            return Ok(None);
        }
        return Err(format!("unknown inline macro '{name}:'"));
    }
    if label.contains('[') {
        return Err(format!("unexpected '[' inside inline macro '{name}:'"));
    }

    let kind = match name.as_str() {
        "link" => InlineKind::Link {
            target,
            label: label.trim().to_string(),
        },
        "term" => {
            if !label.is_empty() {
                return Err(format!(
                    "term macro takes no label, write 'term:{target}[]'"
                ));
            }
            InlineKind::TermRef { term: target }
        }
        "icdref" => {
            let doc_id = DocId::new(target).map_err(|e| e.to_string())?;
            let version = label
                .trim()
                .parse::<Version>()
                .map_err(|e| format!("icdref to {doc_id}: {e}"))?;
            InlineKind::IcdRef {
                doc_id,
                version,
                resolution: RefResolution::Unchecked,
            }
        }
        _ => unreachable!("known inline macro"),
    };
    Ok(Some((kind, end)))
}
