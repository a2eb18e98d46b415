use std::collections::BTreeSet;

use icdoc_core::gates::{
    report_to_text, run_gates, segment_sentences, GateConfig, RuleId, Severity, Verdict,
};
use icdoc_core::markup::{
    expand_macros, extract_abbreviations, parse_document, parse_glossary, Glossary, RefTable,
};
use icdoc_core::rdl::{parse_rdl_at, RegisterMap};
use icdoc_core::{DocId, Document};
use proptest::prelude::*;

const CENTRAL: &str = "ADC\tanalog-to-digital converter\nLCU\tlocal control unit\n";

const CLEAN: &str = "\
= Clean ICD
:doc-id: clean
:version: 1.0

== Introduction

The term:LCU[] samples the ADC once per cycle.
See link:notes.txt[the notes] and link:#register-map[the map].

== Register Map

[rdl]
----
addrmap lcu {
  littleendian;
  reg {
    desc = \"Status\";
    field { sw = r; reset = 0; desc = \"Ready flag\"; } ready[0:0];
  } status @ 0x0;
};
----

== Glossary

glossary::[]
";

fn existing(target: &str) -> bool {
    target == "notes.txt"
}

fn glossary(central: &str, local: Option<&str>) -> Glossary {
    let mut g = Glossary::central(parse_glossary(central).unwrap());
    if let Some(l) = local {
        g.merge_local(parse_glossary(l).unwrap());
    }
    g
}

fn prepare(src: &str, g: &Glossary, refs: &RefTable) -> (Document, Vec<RegisterMap>) {
    let doc = parse_document(src).unwrap();
    let maps = doc
        .rdl_sources()
        .map(|(s, line)| parse_rdl_at(s, line).unwrap())
        .collect();
    (expand_macros(&doc, g, &[], refs), maps)
}

fn gate(src: &str, g: &Glossary, config: &GateConfig) -> icdoc_core::gates::GateReport {
    let (doc, maps) = prepare(src, g, &RefTable::unchecked());
    run_gates(&doc, &maps, g, config, &existing).unwrap()
}

#[test]
fn clean_document_passes() {
    let g = glossary(CENTRAL, None);
    let config = GateConfig {
        required_sections: vec!["Introduction".into(), "Register Map".into()],
        forbidden_phrases: vec!["in order to".into()],
        ..GateConfig::default()
    };
    let report = gate(CLEAN, &g, &config);
    assert!(report.violations.is_empty(), "{}", report_to_text(&report));
    assert_eq!(report.verdict, Verdict::Pass);
}

#[test]
fn broken_link_is_one_error() {
    let g = glossary(CENTRAL, None);
    let src = CLEAN.replace("link:notes.txt", "link:missing.txt");
    let report = gate(&src, &g, &GateConfig::default());
    assert_eq!(report.violations.len(), 1);
    let v = &report.violations[0];
    assert_eq!(v.rule_id, RuleId::Link1);
    assert_eq!(v.severity, Severity::Error);
    assert_eq!(v.location.line, 8);
    assert_eq!(report.verdict, Verdict::Fail);
    assert!(
        report_to_text(&report).starts_with("error G-LINK-1 line 8: broken link 'missing.txt'\n")
    );
}

#[test]
fn fragment_links_check_headings() {
    let g = glossary(CENTRAL, None);
    let src = CLEAN.replace("#register-map", "#no-such-heading");
    let report = gate(&src, &g, &GateConfig::default());
    assert_eq!(report.count(RuleId::Link1), 1);
    let src = CLEAN.replace("#register-map", "#term-LCU");
    assert!(gate(&src, &g, &GateConfig::default()).violations.is_empty());
}

#[test]
fn external_links_offline_by_default() {
    let g = glossary(CENTRAL, None);
    let src = CLEAN.replace("link:notes.txt", "link:https://example.invalid/x");
    assert!(gate(&src, &g, &GateConfig::default()).violations.is_empty());
    let config = GateConfig {
        check_external_links: true,
        ..GateConfig::default()
    };
    assert_eq!(gate(&src, &g, &config).count(RuleId::Link1), 1);
}

fn words(n: usize) -> String {
    let body: Vec<String> = (0..n).map(|i| format!("word{i}")).collect();
    format!("{}.", body.join(" "))
}

/// Independent count: split on whitespace after segmentation.
fn long_sentences(text: &str, max: usize) -> usize {
    segment_sentences(text)
        .iter()
        .filter(|s| {
            s.split(char::is_whitespace)
                .filter(|w| !w.is_empty())
                .count()
                > max
        })
        .count()
}

#[test]
fn forty_one_words_trip_style_rule() {
    let g = glossary(CENTRAL, None);
    for (n, expected) in [(40, 0), (41, 1)] {
        let para = words(n);
        assert_eq!(long_sentences(&para, 40), expected);
        let src = CLEAN.replace("== Register Map", &format!("{para}\n\n== Register Map"));
        let report = gate(&src, &g, &GateConfig::default());
        assert_eq!(report.count(RuleId::Style1), expected, "{n} words");
        assert_eq!(report.violations.len(), expected);
        if expected == 1 {
            assert_eq!(report.violations[0].severity, Severity::Warning);
            assert_eq!(report.verdict, Verdict::Pass);
        }
    }
}

#[test]
fn sentence_line_numbers_follow_paragraph_lines() {
    let g = glossary(CENTRAL, None);
    let para = format!("Short one.\nAnd then {}", words(45));
    let src = CLEAN.replace("== Register Map", &format!("{para}\n\n== Register Map"));
    let report = gate(&src, &g, &GateConfig::default());
    assert_eq!(report.count(RuleId::Style1), 1);
    assert_eq!(report.violations[0].location.line, 11);
}

#[test]
fn forbidden_phrase_whole_words_only() {
    let g = glossary(CENTRAL, None);
    let config = GateConfig {
        forbidden_phrases: vec!["in order to".into(), "simply".into()],
        ..GateConfig::default()
    };
    let src = CLEAN.replace(
        "== Register Map",
        "We read it In  Order\nTo check. Simplyfied text.\n\n== Register Map",
    );
    let report = gate(&src, &g, &config);
    assert_eq!(report.count(RuleId::Style2), 1);
    assert_eq!(
        report.violations[0].message,
        "forbidden phrase 'in order to'"
    );
}

#[test]
fn missing_required_section() {
    let g = glossary(CENTRAL, None);
    let config = GateConfig {
        required_sections: vec!["Timing".into(), "introduction".into()],
        ..GateConfig::default()
    };
    let report = gate(CLEAN, &g, &config);
    assert_eq!(report.count(RuleId::Meta1), 1);
    assert!(report.violations[0].message.contains("'Timing'"));
    assert_eq!(report.verdict, Verdict::Fail);
}

#[test]
fn glossary_conflict_is_reported_once() {
    let g = glossary(
        CENTRAL,
        Some("# local\nLCU\tline control unit\nXYZ\textra\n"),
    );
    let report = gate(CLEAN, &g, &GateConfig::default());
    assert_eq!(report.count(RuleId::Gloss1), 1);
    assert_eq!(report.violations.len(), 1);
    assert_eq!(report.violations[0].location.line, 2);
    assert_eq!(report.verdict, Verdict::Fail);
}

#[test]
fn undefined_abbreviation_and_term() {
    let g = glossary(CENTRAL, None);
    let src = CLEAN.replace(
        "once per cycle.",
        "once per cycle via SPI and SPI again and term:FIFO[].",
    );
    let report = gate(&src, &g, &GateConfig::default());
    assert_eq!(report.count(RuleId::Abbr1), 2);
    let config = GateConfig {
        abbreviation_allowlist: BTreeSet::from(["SPI".to_string(), "FIFO".to_string()]),
        ..GateConfig::default()
    };
    assert!(gate(&src, &g, &config).violations.is_empty());
}

#[test]
fn unresolved_icd_ref() {
    let g = glossary(CENTRAL, None);
    let src = CLEAN.replace("once per cycle.", "once per cycle, see icdref:icd-a[1.1].");
    let mut refs = RefTable::checked();
    let (doc, maps) = prepare(&src, &g, &refs);
    let report = run_gates(&doc, &maps, &g, &GateConfig::default(), &existing).unwrap();
    assert_eq!(report.count(RuleId::Ref1), 1);

    refs.insert(
        DocId::new("icd-a").unwrap(),
        "1.1".parse().unwrap(),
        "https://x/icd-a/1.1/",
    );
    let (doc, maps) = prepare(&src, &g, &refs);
    let report = run_gates(&doc, &maps, &g, &GateConfig::default(), &existing).unwrap();
    assert!(report.violations.is_empty());

    let (doc, maps) = prepare(&src, &g, &RefTable::unchecked());
    let report = run_gates(&doc, &maps, &g, &GateConfig::default(), &existing).unwrap();
    assert!(report.violations.is_empty());
}

#[test]
fn rdl_rules_forwarded_with_configured_severity() {
    let g = glossary(CENTRAL, None);
    let src = CLEAN.replace(" reset = 0;", "");
    let report = gate(&src, &g, &GateConfig::default());
    assert_eq!(report.violations.len(), 1);
    assert_eq!(report.violations[0].rule_id.as_str(), "RDL-C1");
    assert_eq!(report.violations[0].location.line, 18);
    assert_eq!(report.verdict, Verdict::Fail);

    let config = GateConfig::from_toml("[severities]\n\"RDL-C1\" = \"warning\"\n").unwrap();
    let report = gate(&src, &g, &config);
    assert_eq!(report.violations[0].severity, Severity::Warning);
    assert_eq!(report.verdict, Verdict::Pass);

    let config = GateConfig::from_toml("required_field_props = [\"sw\", \"desc\"]").unwrap();
    assert!(gate(&src, &g, &config).violations.is_empty());
}

#[test]
fn malformed_config_is_an_error() {
    let g = glossary(CENTRAL, None);
    let (doc, maps) = prepare(CLEAN, &g, &RefTable::unchecked());
    let config = GateConfig {
        max_sentence_words: 0,
        ..GateConfig::default()
    };
    assert!(run_gates(&doc, &maps, &g, &config, &existing).is_err());
}

fn token() -> impl Strategy<Value = String> {
    "[A-Z][A-Z0-9]{1,3}"
}

fn prose() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop_oneof![
            token(),
            "[a-z]{1,8}",
            Just("e.g.".to_string()),
            Just(".".to_string())
        ],
        1..40,
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn abbreviation_rule_is_a_set_difference(
        words in prose(),
        defined in prop::collection::btree_set(token(), 0..6),
        allowed in prop::collection::btree_set(token(), 0..6),
    ) {
        let central: String = defined.iter().map(|t| format!("{t}\tdef\n")).collect();
        let g = glossary(&central, None);
        let src = format!("= T\n:doc-id: t\n:version: 1.0\n\n{}\n", words.join(" "));
        let config = GateConfig {
            abbreviation_allowlist: allowed.clone(),
            max_sentence_words: 1000,
            ..GateConfig::default()
        };
        let (doc, maps) = prepare(&src, &g, &RefTable::unchecked());
        let report = run_gates(&doc, &maps, &g, &config, &existing).unwrap();
        let flagged: BTreeSet<String> = report
            .violations
            .iter()
            .filter(|v| v.rule_id == RuleId::Abbr1)
            .map(|v| v.location.context.clone())
            .collect();
        let found: BTreeSet<String> = extract_abbreviations(&doc).into_iter().map(|(t, _)| t).collect();
        let expected: BTreeSet<String> = found
            .into_iter()
            .filter(|t| !defined.contains(t) && !allowed.contains(t))
            .collect();
        prop_assert_eq!(flagged, expected);
    }

    #[test]
    fn gates_are_pure(words in prose()) {
        let g = glossary(CENTRAL, Some("LCU\tother\n"));
        let src = CLEAN.replace("== Register Map", &format!("{}\n\n== Register Map", words.join(" ")));
        let config = GateConfig { max_sentence_words: 5, ..GateConfig::default() };
        let (doc, maps) = prepare(&src, &g, &RefTable::unchecked());
        let a = run_gates(&doc, &maps, &g, &config, &existing).unwrap();
        let b = run_gates(&doc, &maps, &g, &config, &existing).unwrap();
        prop_assert_eq!(report_to_text(&a), report_to_text(&b));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn clean_paragraph_does_not_add_violations(
        words in prose(),
        clean in prop::collection::vec("[a-z]{1,8}", 1..20),
        max in 3usize..12,
    ) {
        let g = glossary(CENTRAL, None);
        let config = GateConfig {
            max_sentence_words: max,
            forbidden_phrases: vec!["zz".into()],
            ..GateConfig::default()
        };
        let clean: Vec<String> = clean.into_iter().filter(|w| w != "zz").take(max).collect();
        prop_assume!(!clean.is_empty());
        let base = CLEAN.replace("== Register Map", &format!("{}\n\n== Register Map", words.join(" ")));
        let extended = base.replace("== Register Map", &format!("{}.\n\n== Register Map", clean.join(" ")));
        let before = gate(&base, &g, &config);
        let after = gate(&extended, &g, &config);
        for rule in RuleId::all() {
            prop_assert!(after.count(rule) <= before.count(rule), "{}", rule);
        }
    }
}
