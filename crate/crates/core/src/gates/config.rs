use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::{RuleId, Severity};
use crate::rdl::{default_required_props, FieldProp};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Syntax(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Centrally managed gate settings.
///
/// Loaded from a TOML file; every key is optional:
///
/// ```toml
/// max_sentence_words = 40
/// max_warnings = 10
/// forbidden_phrases = ["in order to"]
/// abbreviation_allowlist = ["HZ", "MHZ"]
/// required_sections = ["Introduction", "Register Map"]
/// required_field_props = ["sw", "reset", "desc"]
/// check_external_links = false
///
/// [severities]
/// "G-ABBR-1" = "error"
/// ```
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateConfig {
    pub max_sentence_words: usize,
    /// Matched case-insensitively against sentence text.
    pub forbidden_phrases: Vec<String>,
    pub abbreviation_allowlist: BTreeSet<String>,
    /// Heading titles that must appear somewhere in the document.
    pub required_sections: Vec<String>,
    pub required_field_props: BTreeSet<FieldProp>,
    /// Overrides of the default severities.
    pub severities: BTreeMap<RuleId, Severity>,
    pub max_warnings: usize,
    /// Off by default; when set the caller's link resolver may go to the
    /// network for `scheme://` targets.
    pub check_external_links: bool,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            max_sentence_words: 40,
            forbidden_phrases: Vec::new(),
            abbreviation_allowlist: BTreeSet::new(),
            required_sections: Vec::new(),
            required_field_props: default_required_props(),
            severities: BTreeMap::new(),
            max_warnings: 10,
            check_external_links: false,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    max_sentence_words: Option<i64>,
    max_warnings: Option<i64>,
    forbidden_phrases: Option<Vec<String>>,
    abbreviation_allowlist: Option<Vec<String>>,
    required_sections: Option<Vec<String>>,
    required_field_props: Option<Vec<String>>,
    check_external_links: Option<bool>,
    #[serde(default)]
    severities: BTreeMap<String, String>,
}

impl GateConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;
        let mut config = GateConfig::default();
        if let Some(n) = raw.max_sentence_words {
            if n <= 0 {
                return Err(ConfigError::Invalid(
                    "max_sentence_words must be positive".into(),
                ));
            }
            config.max_sentence_words = n as usize;
        }
        if let Some(n) = raw.max_warnings {
            if n < 0 {
                return Err(ConfigError::Invalid(
                    "max_warnings must not be negative".into(),
                ));
            }
            config.max_warnings = n as usize;
        }
        if let Some(phrases) = raw.forbidden_phrases {
            config.forbidden_phrases = phrases
                .into_iter()
                .map(|p| p.trim().to_lowercase())
                .collect();
        }
        if let Some(tokens) = raw.abbreviation_allowlist {
            config.abbreviation_allowlist = tokens.into_iter().collect();
        }
        if let Some(sections) = raw.required_sections {
            config.required_sections = sections;
        }
        if let Some(props) = raw.required_field_props {
            config.required_field_props = props
                .iter()
                .map(|p| {
                    p.parse::<FieldProp>()
                        .map_err(|e| ConfigError::Invalid(e.to_string()))
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(b) = raw.check_external_links {
            config.check_external_links = b;
        }
        for (rule, severity) in raw.severities {
            let rule: RuleId = rule.parse().map_err(ConfigError::Invalid)?;
            let severity = match severity.as_str() {
                "error" => Severity::Error,
                "warning" => Severity::Warning,
                other => {
                    return Err(ConfigError::Invalid(format!(
                        "severity for {rule} must be 'error' or 'warning', got '{other}'"
                    )))
                }
            };
            config.severities.insert(rule, severity);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_sentence_words == 0 {
            return Err(ConfigError::Invalid(
                "max_sentence_words must be positive".into(),
            ));
        }
        if self.forbidden_phrases.iter().any(|p| p.trim().is_empty()) {
            return Err(ConfigError::Invalid("empty forbidden phrase".into()));
        }
        Ok(())
    }

    pub fn severity(&self, rule: RuleId) -> Severity {
        self.severities
            .get(&rule)
            .copied()
            .unwrap_or_else(|| rule.default_severity())
    }
}
