use std::collections::BTreeSet;
use std::fmt::Write;

use super::{digest, validate_rdl, Digest, FieldProp, RdlViolation, RegisterMap};
use crate::markup::{DocId, Version};

/// Prefix of the checksum line inside generated headers.
pub const CHECKSUM_TAG: &str = "icdoc-checksum: ";
/// Checksum line content while the digest is computed.
pub const CHECKSUM_PLACEHOLDER: &str = "icdoc-checksum: PENDING";

/// Uppercase, with every non-alphanumeric character replaced by `_`.
pub fn header_identifier(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() {
                c.to_ascii_uppercase()
            } else {
                '_'
            }
        })
        .collect()
}

/// Text safe to embed in a C block comment on a single line.
fn comment_text(text: &str) -> String {
    text.split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .replace("*/", "* /")
        .replace(CHECKSUM_TAG.trim_end(), "icdoc checksum")
}

/// Emit the C header for `map`.
///
/// The header comment carries `icdoc-checksum: sha256:<hex>`, where `<hex>`
/// is the SHA-256 of the header bytes with that line's value replaced by
/// `PENDING`. Output is byte-deterministic.
pub fn generate_header(map: &RegisterMap, doc_id: &DocId, version: &Version) -> Vec<u8> {
    let prefix = header_identifier(&map.name);
    let guard = format!("{}_{}_H", header_identifier(doc_id.as_str()), prefix);

    let mut out = String::new();
    out.push_str("/*\n");
    let _ = writeln!(
        out,
        " * Register definitions for address map {}.",
        comment_text(&map.name)
    );
    let _ = writeln!(out, " * Generated from {doc_id} {version}. Do not edit.");
    out.push_str(" *\n");
    let _ = writeln!(out, " * icdoc-doc-id: {doc_id}");
    let _ = writeln!(out, " * icdoc-version: {version}");
    let _ = writeln!(out, " * {CHECKSUM_PLACEHOLDER}");
    out.push_str(" */\n");
    let _ = writeln!(out, "#ifndef {guard}\n#define {guard}\n");

    for reg in &map.registers {
        let reg_prefix = format!("{prefix}_{}", header_identifier(&reg.name));
        let _ = write!(
            out,
            "/* {} @ {:#X} ({} bits)",
            comment_text(&reg.name),
            reg.offset,
            reg.regwidth
        );
        if let Some(desc) = &reg.desc {
            let _ = write!(out, ": {}", comment_text(desc));
        }
        out.push_str(" */\n");
        let _ = writeln!(out, "#define {reg_prefix}_ADDR {:#X}", reg.offset);
        for field in &reg.fields {
            let fp = format!("{reg_prefix}_{}", header_identifier(&field.name));
            let _ = writeln!(out, "#define {fp}_MASK {:#X}", field.mask());
            let _ = writeln!(out, "#define {fp}_SHIFT {}", field.lsb);
            if let Some(reset) = field.reset {
                let _ = writeln!(out, "#define {fp}_RESET {reset:#X}");
            }
        }
        out.push('\n');
    }
    let _ = writeln!(out, "#endif /* {guard} */");

    let sum = digest(out.as_bytes());
    out.replacen(CHECKSUM_PLACEHOLDER, &format!("{CHECKSUM_TAG}{sum}"), 1)
        .into_bytes()
}

/// Publish-mode header generation: refuses maps with any completeness
/// violation.
pub fn generate_header_checked(
    map: &RegisterMap,
    doc_id: &DocId,
    version: &Version,
    required_field_props: &BTreeSet<FieldProp>,
) -> Result<Vec<u8>, Vec<RdlViolation>> {
    let violations = validate_rdl(map, required_field_props);
    if violations.is_empty() {
        Ok(generate_header(map, doc_id, version))
    } else {
        Err(violations)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ChecksumError {
    #[error("no embedded checksum line")]
    Missing,
    #[error("malformed embedded checksum: {0}")]
    Malformed(String),
    #[error("embedded checksum {embedded} does not match content {actual}")]
    Mismatch { embedded: Digest, actual: Digest },
}

/// Check a header's embedded checksum against its content. Returns the
/// embedded digest when it matches.
pub fn verify_header_checksum(bytes: &[u8]) -> Result<Digest, ChecksumError> {
    let text = String::from_utf8_lossy(bytes);
    let marker = format!("{CHECKSUM_TAG}sha256:");
    let start = text.find(&marker).ok_or(ChecksumError::Missing)?;
    let hex_start = start + marker.len();
    let hex = text[hex_start..]
        .get(..64)
        .ok_or_else(|| ChecksumError::Malformed("truncated".into()))?;
    let embedded = Digest::from_hex(hex).map_err(|e| ChecksumError::Malformed(e.to_string()))?;
    let mut restored = String::with_capacity(text.len());
    restored.push_str(&text[..start]);
    restored.push_str(CHECKSUM_PLACEHOLDER);
    restored.push_str(&text[hex_start + 64..]);
    let actual = digest(restored.as_bytes());
    if actual == embedded {
        Ok(embedded)
    } else {
        Err(ChecksumError::Mismatch { embedded, actual })
    }
}
