#![allow(dead_code)]

use std::path::{Path, PathBuf};

use icdoc::BuildOptions;
use icdoc_core::BuildMode;

pub const GATE_FIXTURES: [(&str, &str); 6] = [
    ("gate-link", "G-LINK-1"),
    ("gate-abbr", "G-ABBR-1"),
    ("gate-style-1", "G-STYLE-1"),
    ("gate-style-2", "G-STYLE-2"),
    ("gate-gloss", "G-GLOSS-1"),
    ("gate-meta", "G-META-1"),
];

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(name: &str) -> PathBuf {
    fixtures().join(name)
}

/// Central glossary, plus `<stem>.glossary.tsv` as local glossary when the
/// fixture has one.
pub fn glossaries_for(stem: &str) -> Vec<PathBuf> {
    let mut g = vec![fixture("glossary.tsv")];
    let local = fixture(&format!("{stem}.glossary.tsv"));
    if local.exists() {
        g.push(local);
    }
    g
}

pub fn options(stem: &str, out: &Path, mode: BuildMode) -> BuildOptions {
    BuildOptions {
        config: Some(fixture("config.toml")),
        glossaries: glossaries_for(stem),
        history: Some(fixture("history.tsv")),
        src: Some("test-rev".into()),
        ..BuildOptions::new(fixture(&format!("{stem}.icd")), out, mode)
    }
}

/// Copy of a fixture with its `:version:` attribute replaced, written into
/// `dir` (alongside the referenced notes file).
pub fn versioned(dir: &Path, stem: &str, version: &str) -> PathBuf {
    let text = std::fs::read_to_string(fixture(&format!("{stem}.icd"))).unwrap();
    let text = text.replacen(":version: 1.0", &format!(":version: {version}"), 1);
    let path = dir.join(format!("{stem}-{version}.icd"));
    std::fs::write(&path, text).unwrap();
    path
}

pub fn publish_options(
    source: PathBuf,
    out: &Path,
    tracker: &str,
    canonical: &str,
) -> BuildOptions {
    BuildOptions {
        config: Some(fixture("config.toml")),
        glossaries: vec![fixture("glossary.tsv")],
        tracker: Some(tracker.to_string()),
        canonical: Some(canonical.to_string()),
        src: Some("test-rev".into()),
        ..BuildOptions::new(source, out, BuildMode::Publish)
    }
}
