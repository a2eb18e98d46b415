use std::path::{Path, PathBuf};
use std::time::Duration;

use icdoc_core::gates::{GateConfig, LinkResolver};
use icdoc_core::manifest::document_refs;
use icdoc_core::markup::{
    expand_macros, is_external_target, parse_document, parse_glossary, parse_history, Glossary,
    HistoryEntry, RefTable,
};
use icdoc_core::rdl::{parse_rdl_at, RegisterMap};
use icdoc_core::Document;
use icdoc_tracker::TrackerClient;

use crate::PipelineError;

pub(crate) fn read(path: &Path) -> Result<String, PipelineError> {
    std::fs::read_to_string(path).map_err(|e| PipelineError::io("read", path, e))
}

pub(crate) fn load_config(path: Option<&Path>) -> Result<GateConfig, PipelineError> {
    match path {
        None => Ok(GateConfig::default()),
        Some(p) => GateConfig::from_toml(&read(p)?)
            .map_err(|e| PipelineError::Config(format!("{}: {e}", p.display()))),
    }
}

/// The first file is the central glossary, the rest are local additions.
pub(crate) fn load_glossary(paths: &[PathBuf]) -> Result<Glossary, PipelineError> {
    let mut glossary = Glossary::default();
    for (i, path) in paths.iter().enumerate() {
        let lines = parse_glossary(&read(path)?).map_err(|e| PipelineError::syntax(path, e))?;
        if i == 0 {
            glossary = Glossary::central(lines);
        } else {
            glossary.merge_local(lines);
        }
    }
    Ok(glossary)
}

pub(crate) fn load_history(path: Option<&Path>) -> Result<Vec<HistoryEntry>, PipelineError> {
    match path {
        None => Ok(Vec::new()),
        Some(p) => parse_history(&read(p)?).map_err(|e| PipelineError::syntax(p, e)),
    }
}

/// Canonical locations of the referenced versions, looked up in the tracker.
/// Without a tracker the references stay unchecked.
pub(crate) fn ref_table(
    doc: &Document,
    tracker: Option<&TrackerClient>,
) -> Result<RefTable, PipelineError> {
    let Some(client) = tracker else {
        return Ok(RefTable::unchecked());
    };
    let mut table = RefTable::checked();
    for pin in document_refs(doc) {
        let view = client
            .get(&pin.doc_id)
            .map_err(|e| PipelineError::Io(e.to_string()))?;
        if let Some(record) = view.as_ref().and_then(|v| v.record.version(&pin.version)) {
            table.insert(
                pin.doc_id.clone(),
                pin.version,
                record.build_location.clone(),
            );
        }
    }
    Ok(table)
}

/// Source parsed, register maps parsed, glossary merged and macros expanded.
pub(crate) struct Prepared {
    pub doc: Document,
    pub maps: Vec<RegisterMap>,
    pub glossary: Glossary,
    pub config: GateConfig,
}

pub(crate) struct Sources<'a> {
    pub source: &'a Path,
    pub config: Option<&'a Path>,
    pub glossaries: &'a [PathBuf],
    pub history: Option<&'a Path>,
    pub tracker: Option<&'a TrackerClient>,
}

pub(crate) fn prepare(s: &Sources) -> Result<Prepared, PipelineError> {
    let text = read(s.source)?;
    let doc = parse_document(&text).map_err(|e| PipelineError::syntax(s.source, e))?;
    let maps = doc
        .rdl_sources()
        .map(|(src, line)| parse_rdl_at(src, line))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| PipelineError::syntax(s.source, e))?;
    let config = load_config(s.config)?;
    let glossary = load_glossary(s.glossaries)?;
    let history = load_history(s.history)?;
    let refs = ref_table(&doc, s.tracker)?;
    let doc = expand_macros(&doc, &glossary, &history, &refs);
    Ok(Prepared {
        doc,
        maps,
        glossary,
        config,
    })
}

/// Resolves local link targets against the directory of the source file.
/// External targets are fetched only when `http` is set.
pub(crate) struct Resolver {
    base: PathBuf,
    http: Option<reqwest::blocking::Client>,
}

impl Resolver {
    pub fn new(source: &Path, check_external: bool) -> Self {
        let base = source
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .unwrap_or(Path::new("."))
            .to_path_buf();
        let http = check_external.then(|| {
            reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(10))
                .build()
                .expect("http client")
        });
        Resolver { base, http }
    }
}

impl LinkResolver for Resolver {
    fn exists(&self, target: &str) -> bool {
        if is_external_target(target) {
            let Some(http) = &self.http else {
                return true;
            };
            if target.starts_with("mailto:") {
                return true;
            }
            let ok = |r: reqwest::Result<reqwest::blocking::Response>| {
                r.map(|resp| resp.status().is_success()).unwrap_or(false)
            };
            return ok(http.head(target).send()) || ok(http.get(target).send());
        }
        self.base.join(target).exists()
    }
}
