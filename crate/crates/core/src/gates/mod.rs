//! Documentation quality gates.
//!
//! The catalogue:
//!
//! | rule        | checks                                              | default  |
//! |-------------|-----------------------------------------------------|----------|
//! | `G-LINK-1`  | link target does not exist                          | error    |
//! | `G-ABBR-1`  | abbreviation not in glossary or allowlist           | warning  |
//! | `G-STYLE-1` | sentence longer than `max_sentence_words`           | warning  |
//! | `G-STYLE-2` | forbidden phrase                                    | warning  |
//! | `G-GLOSS-1` | local glossary entry contradicts the central one    | error    |
//! | `G-META-1`  | required section missing                            | error    |
//! | `G-REF-1`   | `icdref:` not published in the registry             | error    |
//! | `RDL-C1..7` | register description completeness                   | error    |

mod config;
mod run;
mod sentences;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::rdl::RdlRule;

pub use config::{ConfigError, GateConfig};
pub use run::{run_gates, LinkResolver};
pub use sentences::segment_sentences;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RuleId {
    Link1,
    Abbr1,
    Style1,
    Style2,
    Gloss1,
    Meta1,
    Ref1,
    Rdl(RdlRule),
}

impl RuleId {
    pub const DOC_RULES: [RuleId; 7] = [
        RuleId::Link1,
        RuleId::Abbr1,
        RuleId::Style1,
        RuleId::Style2,
        RuleId::Gloss1,
        RuleId::Meta1,
        RuleId::Ref1,
    ];

    pub fn all() -> impl Iterator<Item = RuleId> {
        Self::DOC_RULES
            .into_iter()
            .chain(RdlRule::ALL.into_iter().map(RuleId::Rdl))
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RuleId::Link1 => "G-LINK-1",
            RuleId::Abbr1 => "G-ABBR-1",
            RuleId::Style1 => "G-STYLE-1",
            RuleId::Style2 => "G-STYLE-2",
            RuleId::Gloss1 => "G-GLOSS-1",
            RuleId::Meta1 => "G-META-1",
            RuleId::Ref1 => "G-REF-1",
            RuleId::Rdl(r) => r.id(),
        }
    }

    pub fn default_severity(self) -> Severity {
        match self {
            RuleId::Abbr1 | RuleId::Style1 | RuleId::Style2 => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RuleId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        RuleId::all()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| format!("unknown rule id '{s}'"))
    }
}

impl Serialize for RuleId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for RuleId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Location {
    pub line: usize,
    /// Short excerpt of the offending text.
    pub context: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub rule_id: RuleId,
    pub severity: Severity,
    pub location: Location,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Outcome of a gate run. Violations are ordered by line; the verdict is
/// `fail` iff there is an error or more than `max_warnings` warnings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GateReport {
    pub violations: Vec<Violation>,
    pub errors: usize,
    pub warnings: usize,
    pub max_warnings: usize,
    pub verdict: Verdict,
}

impl GateReport {
    pub fn new(mut violations: Vec<Violation>, max_warnings: usize) -> Self {
        violations.sort_by(|a, b| {
            a.location
                .line
                .cmp(&b.location.line)
                .then(a.rule_id.cmp(&b.rule_id))
                .then_with(|| a.message.cmp(&b.message))
        });
        let errors = violations
            .iter()
            .filter(|v| v.severity == Severity::Error)
            .count();
        let warnings = violations.len() - errors;
        let verdict = if errors > 0 || warnings > max_warnings {
            Verdict::Fail
        } else {
            Verdict::Pass
        };
        GateReport {
            violations,
            errors,
            warnings,
            max_warnings,
            verdict,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn count(&self, rule: RuleId) -> usize {
        self.violations.iter().filter(|v| v.rule_id == rule).count()
    }
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        format!("{n} {word}")
    } else {
        format!("{n} {word}s")
    }
}

/// One `<severity> <rule> line <n>: <message>` line per violation, then the
/// verdict line.
pub fn report_to_text(report: &GateReport) -> String {
    let mut out = String::new();
    for v in &report.violations {
        out.push_str(&format!(
            "{} {} line {}: {}\n",
            v.severity, v.rule_id, v.location.line, v.message
        ));
    }
    let verdict = match report.verdict {
        Verdict::Pass => "PASS",
        Verdict::Fail => "FAIL",
    };
    out.push_str(&format!(
        "{verdict} ({}, {})\n",
        plural(report.errors, "error"),
        plural(report.warnings, "warning")
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn violation(rule: RuleId, severity: Severity, line: usize) -> Violation {
        Violation {
            rule_id: rule,
            severity,
            location: Location {
                line,
                context: String::new(),
            },
            message: format!("{rule} at {line}"),
        }
    }

    #[test]
    fn empty_report_text() {
        assert_eq!(
            report_to_text(&GateReport::new(vec![], 10)),
            "PASS (0 errors, 0 warnings)\n"
        );
    }

    #[test]
    fn one_error_text() {
        let mut v = violation(RuleId::Link1, Severity::Error, 12);
        v.message = "broken link 'missing.txt'".into();
        let report = GateReport::new(vec![v], 10);
        let text = report_to_text(&report);
        assert_eq!(
            text,
            "error G-LINK-1 line 12: broken link 'missing.txt'\nFAIL (1 error, 0 warnings)\n"
        );
        assert_eq!(text, report_to_text(&report));
    }

    #[test]
    fn ordering_by_line() {
        let r = GateReport::new(
            vec![
                violation(RuleId::Style1, Severity::Warning, 9),
                violation(RuleId::Link1, Severity::Error, 3),
            ],
            10,
        );
        assert_eq!(r.violations[0].location.line, 3);
    }

    #[test]
    fn rule_ids_parse_and_defaults() {
        for r in RuleId::all() {
            assert_eq!(r.as_str().parse::<RuleId>().unwrap(), r);
        }
        assert_eq!(RuleId::all().count(), 14);
        assert_eq!(RuleId::Abbr1.default_severity(), Severity::Warning);
        assert_eq!(RuleId::Rdl(RdlRule::C4).default_severity(), Severity::Error);
        assert_eq!(RuleId::Gloss1.default_severity(), Severity::Error);
        assert!("G-FOO-1".parse::<RuleId>().is_err());
    }

    proptest! {
        #[test]
        fn verdict_decision_table(
            errs in 0usize..4,
            warns in 0usize..15,
            max in 0usize..12,
        ) {
            let mut vs = Vec::new();
            for i in 0..errs { vs.push(violation(RuleId::Link1, Severity::Error, i + 1)); }
            for i in 0..warns { vs.push(violation(RuleId::Style1, Severity::Warning, i + 1)); }
            let r = GateReport::new(vs, max);
            prop_assert_eq!(r.errors, errs);
            prop_assert_eq!(r.warnings, warns);
            let expect_fail = errs > 0 || warns > max;
            prop_assert_eq!(r.verdict == Verdict::Fail, expect_fail);
        }
    }
}
