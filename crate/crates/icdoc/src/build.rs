use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use icdoc_core::gates::{report_to_text, run_gates, GateReport};
use icdoc_core::manifest::document_refs;
use icdoc_core::markup::render;
use icdoc_core::rdl::{digest, generate_header, generate_header_checked, render_tables};
use icdoc_core::{ArtifactEntry, BuildMode, Manifest};
use icdoc_tracker::{ClientError, StatusChange, TrackerClient};

use crate::inputs::{prepare, Resolver, Sources};
use crate::{Exit, PipelineError};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone)]
pub struct BuildOptions {
    pub source: PathBuf,
    pub out_dir: PathBuf,
    pub mode: BuildMode,
    pub config: Option<PathBuf>,
    /// Central glossary first, then local glossaries.
    pub glossaries: Vec<PathBuf>,
    pub history: Option<PathBuf>,
    pub tracker: Option<String>,
    /// Source revision; defaults to the contents of a `REVISION` file next to
    /// the source, else `unversioned`.
    pub src: Option<String>,
    pub canonical: Option<String>,
}

impl BuildOptions {
    pub fn new(source: impl Into<PathBuf>, out_dir: impl Into<PathBuf>, mode: BuildMode) -> Self {
        BuildOptions {
            source: source.into(),
            out_dir: out_dir.into(),
            mode,
            config: None,
            glossaries: Vec::new(),
            history: None,
            tracker: None,
            src: None,
            canonical: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub report: GateReport,
    /// Files written to the output directory, manifest last.
    pub written: Vec<PathBuf>,
    pub manifest: Option<Manifest>,
    /// Status changes reported by the tracker after publication.
    pub changes: Vec<StatusChange>,
    pub exit: Exit,
}

fn source_revision(opts: &BuildOptions) -> String {
    if let Some(src) = &opts.src {
        return src.clone();
    }
    let file = opts
        .source
        .parent()
        .unwrap_or(Path::new("."))
        .join("REVISION");
    std::fs::read_to_string(file)
        .ok()
        .map(|s| s.trim().to_string())
        .filter(|s| !s.is_empty())
        .unwrap_or_else(|| "unversioned".to_string())
}

/// Lowercase file-name stem: ASCII alphanumerics, `-` and `_` kept, anything
/// else becomes `_`.
fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c.to_ascii_lowercase()
            } else {
                '_'
            }
        })
        .collect()
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), PipelineError> {
    std::fs::write(path, bytes).map_err(|e| PipelineError::io("write", path, e))
}

/// Build one ICD: parse, expand, gate, render, generate headers, digest and
/// write the manifest; in publish mode with a tracker, record the version.
///
/// Gate failures are reported through [`BuildOutcome::exit`]; everything
/// else that stops the build is an error.
pub fn build(opts: &BuildOptions, out: &mut dyn Write) -> Result<BuildOutcome, PipelineError> {
    let publishing = opts.mode == BuildMode::Publish;
    let client = match (&opts.tracker, publishing) {
        (Some(url), true) => {
            if opts
                .canonical
                .as_deref()
                .is_none_or(|c| c.trim().is_empty())
            {
                return Err(PipelineError::Config(
                    "publishing to a tracker requires --canonical".into(),
                ));
            }
            Some(TrackerClient::new(url))
        }
        (Some(url), false) => Some(TrackerClient::new(url)),
        (None, _) => None,
    };
    let prepared = prepare(&Sources {
        source: &opts.source,
        config: opts.config.as_deref(),
        glossaries: &opts.glossaries,
        history: opts.history.as_deref(),
        tracker: client.as_ref(),
    })?;
    let doc = &prepared.doc;
    let resolver = Resolver::new(&opts.source, prepared.config.check_external_links);
    let report = run_gates(
        doc,
        &prepared.maps,
        &prepared.glossary,
        &prepared.config,
        &resolver,
    )
    .map_err(|e| PipelineError::Config(e.to_string()))?;
    let text = report_to_text(&report);
    let _ = out.write_all(text.as_bytes());

    let mut outcome = BuildOutcome {
        report: report.clone(),
        written: Vec::new(),
        manifest: None,
        changes: Vec::new(),
        exit: Exit::Ok,
    };
    if publishing && !report.passed() {
        outcome.exit = Exit::GateFailure;
        return Ok(outcome);
    }

    let stem = file_stem(doc.doc_id.as_str());
    let tables: Vec<_> = prepared.maps.iter().map(render_tables).collect();
    let mut artifacts: Vec<(String, Vec<u8>)> =
        vec![(format!("{stem}.html"), render(doc, &tables))];
    let mut seen = BTreeSet::new();
    for map in &prepared.maps {
        let name = format!("{stem}_{}.h", file_stem(&map.name));
        if !seen.insert(name.clone()) {
            return Err(PipelineError::Syntax {
                file: opts.source.display().to_string(),
                err: icdoc_core::ParseError::new(
                    map.line,
                    format!("duplicate addrmap name '{}'", map.name),
                ),
            });
        }
        let bytes = if publishing {
            match generate_header_checked(
                map,
                &doc.doc_id,
                &doc.version,
                &prepared.config.required_field_props,
            ) {
                Ok(b) => b,
                Err(violations) => {
                    for v in &violations {
                        let _ = writeln!(
                            out,
                            "header refused: {} line {}: {}",
                            v.rule.id(),
                            v.line,
                            v.message
                        );
                    }
                    outcome.exit = Exit::GateFailure;
                    return Ok(outcome);
                }
            }
        } else {
            generate_header(map, &doc.doc_id, &doc.version)
        };
        artifacts.push((name, bytes));
    }

    std::fs::create_dir_all(&opts.out_dir)
        .map_err(|e| PipelineError::io("create", &opts.out_dir, e))?;
    for (name, bytes) in &artifacts {
        let path = opts.out_dir.join(name);
        write_file(&path, bytes)?;
        outcome.written.push(path);
    }
    let report_path = opts.out_dir.join(format!("{stem}.gates.txt"));
    write_file(&report_path, text.as_bytes())?;
    outcome.written.push(report_path);

    let mut entries: Vec<ArtifactEntry> = artifacts
        .iter()
        .map(|(name, bytes)| ArtifactEntry {
            path: name.clone(),
            sha256: digest(bytes),
        })
        .collect();
    entries.sort_by(|a, b| a.path.cmp(&b.path));
    let manifest = Manifest {
        doc_id: doc.doc_id.clone(),
        version: doc.version,
        src: source_revision(opts),
        refs: document_refs(doc),
        artifacts: entries,
        build_location: opts.canonical.clone(),
    };
    let manifest_path = opts.out_dir.join(MANIFEST_FILE);
    write_file(&manifest_path, manifest.to_json().as_bytes())?;
    outcome.written.push(manifest_path);
    for path in &outcome.written {
        let _ = writeln!(out, "wrote {}", path.display());
    }

    if let (Some(client), true) = (&client, publishing) {
        let tracker_err = |e: ClientError| match e {
            ClientError::Rejected { .. } => PipelineError::TrackerRejected(e.to_string()),
            other => PipelineError::Io(other.to_string()),
        };
        client
            .ensure_registered(&manifest.doc_id)
            .map_err(tracker_err)?;
        outcome.changes = client.publish(&manifest).map_err(tracker_err)?;
        let _ = writeln!(out, "published {} {}", manifest.doc_id, manifest.version);
        for c in &outcome.changes {
            let _ = write!(out, "status {}: {} -> {}", c.doc_id, c.from, c.to);
            if !c.reason.is_empty() {
                let _ = write!(out, " ({})", c.reason);
            }
            let _ = writeln!(out);
        }
    }
    outcome.manifest = Some(manifest);
    Ok(outcome)
}

#[derive(Debug, Clone, Default)]
pub struct GatesOptions {
    pub source: PathBuf,
    pub config: Option<PathBuf>,
    pub glossaries: Vec<PathBuf>,
    pub history: Option<PathBuf>,
    /// When set, `icdref:` targets are checked against the tracker.
    pub tracker: Option<String>,
}

/// Run parse, expansion and the gates only, print the report and write
/// nothing.
pub fn gates_dry_run(
    opts: &GatesOptions,
    out: &mut dyn Write,
) -> Result<(GateReport, Exit), PipelineError> {
    let client = opts.tracker.as_deref().map(TrackerClient::new);
    let prepared = prepare(&Sources {
        source: &opts.source,
        config: opts.config.as_deref(),
        glossaries: &opts.glossaries,
        history: opts.history.as_deref(),
        tracker: client.as_ref(),
    })?;
    let resolver = Resolver::new(&opts.source, prepared.config.check_external_links);
    let report = run_gates(
        &prepared.doc,
        &prepared.maps,
        &prepared.glossary,
        &prepared.config,
        &resolver,
    )
    .map_err(|e| PipelineError::Config(e.to_string()))?;
    let _ = out.write_all(report_to_text(&report).as_bytes());
    let exit = if report.passed() {
        Exit::Ok
    } else {
        Exit::GateFailure
    };
    Ok((report, exit))
}
