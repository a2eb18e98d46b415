use chrono::NaiveDate;

use super::Version;
use crate::ParseError;

/// One row of the document log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryEntry {
    pub version: Version,
    pub date: NaiveDate,
    pub author: String,
    pub summary: String,
}

/// Parse a history file of `version<TAB>date<TAB>author<TAB>summary` lines.
/// Entries must be strictly increasing by version; blank lines are skipped.
pub fn parse_history(text: &str) -> Result<Vec<HistoryEntry>, ParseError> {
    let mut entries: Vec<HistoryEntry> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = raw.splitn(4, '\t').collect();
        let [version, date, author, summary] = cols[..] else {
            return Err(ParseError::new(
                line,
                "expected 'version<TAB>date<TAB>author<TAB>summary'",
            ));
        };
        let version: Version = version
            .trim()
            .parse()
            .map_err(|e: super::VersionError| ParseError::new(line, e.to_string()))?;
        let date = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d").map_err(|_| {
            ParseError::new(line, format!("invalid ISO-8601 date '{}'", date.trim()))
        })?;
        if let Some(prev) = entries.last() {
            if version <= prev.version {
                return Err(ParseError::new(
                    line,
                    format!(
                        "history versions must increase: {} after {}",
                        version, prev.version
                    ),
                ));
            }
        }
        entries.push(HistoryEntry {
            version,
            date,
            author: author.trim().to_string(),
            summary: summary.trim().to_string(),
        });
    }
    Ok(entries)
}
