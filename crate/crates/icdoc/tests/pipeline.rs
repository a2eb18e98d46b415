mod common;

use std::collections::BTreeSet;
use std::process::Command;

use common::*;
use icdoc::{build, check, gates_dry_run, BuildOptions, CheckOptions, Drift, Exit, GatesOptions};
use icdoc_core::gates::Verdict;
use icdoc_core::manifest::document_refs;
use icdoc_core::markup::parse_document;
use icdoc_core::rdl::{digest, verify_header_checksum};
use icdoc_core::{BuildMode, DocId, Manifest};
use icdoc_tracker::{EventKind, ServerHandle, Status, TrackerClient};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sink() -> Vec<u8> {
    Vec::new()
}

#[test]
fn clean_publish_without_tracker() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let outcome = build(&options("clean", &out, BuildMode::Publish), &mut sink()).unwrap();
    assert_eq!(outcome.exit, Exit::Ok);
    for name in ["lcu-status.html", "lcu-status_lcu.h", "manifest.json"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let manifest =
        Manifest::from_json(&std::fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest, outcome.manifest.unwrap());
    assert_eq!(manifest.src, "test-rev");
    assert_eq!(manifest.artifacts.len(), 2);
    for a in &manifest.artifacts {
        assert_eq!(digest(&std::fs::read(out.join(&a.path)).unwrap()), a.sha256);
    }
    verify_header_checksum(&std::fs::read(out.join("lcu-status_lcu.h")).unwrap()).unwrap();
}

#[test]
fn missing_reset_blocks_publication() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(fixture("clean.icd")).unwrap();
    let src = dir.path().join("noreset.icd");
    std::fs::write(&src, text.replace("reset = 0xA5; ", "")).unwrap();
    std::fs::copy(fixture("notes.txt"), dir.path().join("notes.txt")).unwrap();
    let out = dir.path().join("out");
    let opts = BuildOptions {
        source: src,
        ..options("clean", &out, BuildMode::Publish)
    };
    let mut text_out = sink();
    let outcome = build(&opts, &mut text_out).unwrap();
    assert_eq!(outcome.exit, Exit::GateFailure);
    assert_eq!(outcome.report.count("RDL-C1".parse().unwrap()), 1);
    assert!(String::from_utf8(text_out)
        .unwrap()
        .contains("error RDL-C1"));
    assert!(!out.join("manifest.json").exists());
    assert!(!out.exists());

    let draft = build(
        &BuildOptions {
            mode: BuildMode::Draft,
            ..opts
        },
        &mut sink(),
    )
    .unwrap();
    assert_eq!(draft.exit, Exit::Ok);
    assert_eq!(draft.report.verdict, Verdict::Fail);
    assert!(out.join("manifest.json").exists());
}

#[test]
fn syntax_and_io_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.icd");
    std::fs::write(&bad, "= T\n:version: 1.0\n\nx\n").unwrap();
    let err = build(
        &BuildOptions::new(&bad, dir.path().join("o"), BuildMode::Draft),
        &mut sink(),
    )
    .unwrap_err();
    assert_eq!(err.exit(), Exit::Syntax);
    assert!(err
        .to_string()
        .contains("missing required attribute doc-id"));

    std::fs::write(
        &bad,
        "= T\n:doc-id: t\n:version: 1.0\n\n[rdl]\n----\naddrmap m { reg { } r; };\n----\n",
    )
    .unwrap();
    let err = build(
        &BuildOptions::new(&bad, dir.path().join("o"), BuildMode::Draft),
        &mut sink(),
    )
    .unwrap_err();
    assert_eq!(err.exit(), Exit::Syntax);
    assert!(err.to_string().contains("line 7"), "{err}");

    let missing = BuildOptions::new(
        dir.path().join("nope.icd"),
        dir.path().join("o"),
        BuildMode::Draft,
    );
    assert_eq!(build(&missing, &mut sink()).unwrap_err().exit(), Exit::Io);

    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "max_sentence_words = 0\n").unwrap();
    let opts = BuildOptions {
        config: Some(cfg),
        ..options("clean", &dir.path().join("o"), BuildMode::Draft)
    };
    assert_eq!(build(&opts, &mut sink()).unwrap_err().exit(), Exit::Io);

    let opts = BuildOptions {
        tracker: Some("http://127.0.0.1:9".into()),
        ..options("clean", &dir.path().join("o"), BuildMode::Publish)
    };
    assert_eq!(build(&opts, &mut sink()).unwrap_err().exit(), Exit::Io);
}

#[test]
fn gates_dry_run_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let before: Vec<_> = std::fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    let mut out = sink();
    let opts = GatesOptions {
        source: fixture("clean.icd"),
        config: Some(fixture("config.toml")),
        glossaries: glossaries_for("clean"),
        ..GatesOptions::default()
    };
    let (_, exit) = gates_dry_run(&opts, &mut out).unwrap();
    assert_eq!(exit, Exit::Ok);
    assert!(String::from_utf8(out).unwrap().starts_with("PASS"));

    let mut out = sink();
    let (report, exit) = gates_dry_run(
        &GatesOptions {
            source: fixture("gate-link.icd"),
            ..opts.clone()
        },
        &mut out,
    )
    .unwrap();
    assert_eq!(exit, Exit::GateFailure);
    assert_eq!(report.violations.len(), 1);
    assert!(String::from_utf8(out)
        .unwrap()
        .contains("error G-LINK-1 line 10: broken link 'calibration.txt'"));
    let after: Vec<_> = std::fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    assert_eq!(before, after);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}

#[test]
fn build_then_check_round_trips_for_every_fixture() {
    for stem in ["clean", "icd-a", "icd-b"]
        .into_iter()
        .chain(GATE_FIXTURES.iter().map(|(s, _)| *s))
    {
        let dir = tempfile::tempdir().unwrap();
        let outcome = build(&options(stem, dir.path(), BuildMode::Draft), &mut sink()).unwrap();
        assert_eq!(outcome.exit, Exit::Ok, "{stem}");
        let opts = CheckOptions {
            manifest: dir.path().join("manifest.json").display().to_string(),
            local_dir: dir.path().to_path_buf(),
            tracker: None,
            reporter: "test".into(),
        };
        let result = check(&opts, &mut sink()).unwrap();
        assert_eq!(result.exit, Exit::Ok, "{stem}");
    }
}

#[test]
fn check_reports_missing_and_modified_files() {
    let dir = tempfile::tempdir().unwrap();
    build(&options("clean", dir.path(), BuildMode::Draft), &mut sink()).unwrap();
    let header = dir.path().join("lcu-status_lcu.h");
    let opts = CheckOptions {
        manifest: dir.path().join("manifest.json").display().to_string(),
        local_dir: dir.path().to_path_buf(),
        tracker: None,
        reporter: "test".into(),
    };
    let mut bytes = std::fs::read(&header).unwrap();
    bytes[100] ^= 0x01;
    std::fs::write(&header, &bytes).unwrap();
    let mut out = sink();
    let result = check(&opts, &mut out).unwrap();
    assert_eq!(result.exit, Exit::Drift);
    assert_eq!(
        result.drift,
        [Drift::Mismatch {
            path: "lcu-status_lcu.h".into(),
            expected: Manifest::from_json(
                &std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()
            )
            .unwrap()
            .artifact("lcu-status_lcu.h")
            .unwrap()
            .sha256
            .clone(),
            actual: digest(&bytes),
        }]
    );
    let text = String::from_utf8(out).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("drift ")).count(), 1);

    std::fs::remove_file(&header).unwrap();
    let mut out = sink();
    let result = check(&opts, &mut out).unwrap();
    assert_eq!(result.exit, Exit::Drift);
    assert!(String::from_utf8(out)
        .unwrap()
        .contains("missing lcu-status_lcu.h"));

    let bad = CheckOptions {
        manifest: dir.path().join("nope.json").display().to_string(),
        ..opts.clone()
    };
    assert_eq!(check(&bad, &mut sink()).unwrap_err().exit(), Exit::Io);
    let bad = CheckOptions {
        local_dir: dir.path().join("nowhere"),
        ..opts
    };
    assert_eq!(check(&bad, &mut sink()).unwrap_err().exit(), Exit::Io);
}

#[test]
fn manifest_refs_match_document_refs() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for round in 0..20 {
        let dir = tempfile::tempdir().unwrap();
        let mut body = String::new();
        let mut expected = BTreeSet::new();
        for _ in 0..rng.gen_range(0..8) {
            let doc = format!("icd-{}", (b'a' + rng.gen_range(0..4u8)) as char);
            let ver = format!("{}.{}", rng.gen_range(1..3), rng.gen_range(0..3));
            body.push_str(&format!("See icdref:{doc}[{ver}] here.\n"));
            expected.insert((doc, ver));
        }
        let src = dir.path().join("doc.icd");
        std::fs::write(
            &src,
            format!("= R\n:doc-id: r{round}\n:version: 1.0\n\n{body}\nreferences::[]\n"),
        )
        .unwrap();
        let outcome = build(
            &BuildOptions::new(&src, dir.path().join("out"), BuildMode::Draft),
            &mut sink(),
        )
        .unwrap();
        let got: BTreeSet<(String, String)> = outcome
            .manifest
            .unwrap()
            .refs
            .iter()
            .map(|p| (p.doc_id.to_string(), p.version.to_string()))
            .collect();
        assert_eq!(got, expected);
        let doc = parse_document(&std::fs::read_to_string(&src).unwrap()).unwrap();
        assert_eq!(document_refs(&doc).len(), expected.len());
    }
}

#[test]
fn revision_required_via_builds() {
    let dir = tempfile::tempdir().unwrap();
    let server = ServerHandle::start(dir.path().join("state.json"), "127.0.0.1:0").unwrap();
    let url = server.url();
    let publish = |stem: &str, version: &str| {
        let src = versioned(dir.path(), stem, version);
        let out = dir.path().join(format!("out-{stem}-{version}"));
        let opts = publish_options(
            src,
            &out,
            &url,
            &format!("https://docs.example.org/{stem}/{version}/"),
        );
        build(&opts, &mut sink())
    };
    publish("icd-a", "1.0").unwrap();
    publish("icd-a", "1.1").unwrap();
    let b = publish("icd-b", "1.0").unwrap();
    assert_eq!(b.exit, Exit::Ok);
    let html = std::fs::read_to_string(dir.path().join("out-icd-b-1.0/icd-b.html")).unwrap();
    assert!(html.contains("https://docs.example.org/icd-a/1.1/"));
    let a = publish("icd-a", "1.2").unwrap();
    assert_eq!(a.changes.len(), 1);

    let client = TrackerClient::new(&url);
    let view = client.get(&DocId::new("icd-b").unwrap()).unwrap().unwrap();
    assert_eq!(view.record.status, Status::RevisionRequired);
    assert!(view.record.status_reason.contains("icd-a 1.1"));

    let err = publish("icd-a", "1.2").unwrap_err();
    assert_eq!(err.exit(), Exit::TrackerRejected);
    server.stop();
}

#[test]
fn dangling_reference_is_a_tracker_rejection() {
    let dir = tempfile::tempdir().unwrap();
    let server = ServerHandle::start(dir.path().join("state.json"), "127.0.0.1:0").unwrap();
    let src = versioned(dir.path(), "icd-b", "1.0");
    let mut opts = publish_options(
        src,
        &dir.path().join("out"),
        &server.url(),
        "https://x/b/1.0/",
    );
    // The reference is unresolved, so G-REF-1 stops the build first.
    let outcome = build(&opts, &mut sink()).unwrap();
    assert_eq!(outcome.exit, Exit::GateFailure);
    assert_eq!(outcome.report.count("G-REF-1".parse().unwrap()), 1);
    // Downgraded, the gate passes and the tracker refuses the version.
    let cfg = dir.path().join("lenient.toml");
    std::fs::write(
        &cfg,
        "required_sections = []\n[severities]\n\"G-REF-1\" = \"warning\"\n",
    )
    .unwrap();
    opts.config = Some(cfg);
    let err = build(&opts, &mut sink()).unwrap_err();
    assert_eq!(err.exit(), Exit::TrackerRejected);
    server.stop();
}

#[test]
fn failing_gate_leaves_tracker_untouched() {
    let dir = tempfile::tempdir().unwrap();
    let state = dir.path().join("state.json");
    let server = ServerHandle::start(state.clone(), "127.0.0.1:0").unwrap();
    let client = TrackerClient::new(&server.url());
    client.register(&DocId::new("gate-link").unwrap()).unwrap();
    let before = client.get(&DocId::new("gate-link").unwrap()).unwrap();
    let opts = BuildOptions {
        tracker: Some(server.url()),
        canonical: Some("https://x/".into()),
        ..options("gate-link", &dir.path().join("out"), BuildMode::Publish)
    };
    assert_eq!(build(&opts, &mut sink()).unwrap().exit, Exit::GateFailure);
    assert_eq!(
        client.get(&DocId::new("gate-link").unwrap()).unwrap(),
        before
    );
    assert_eq!(client.list().unwrap().len(), 1);

    let opts = BuildOptions {
        mode: BuildMode::Draft,
        ..options("clean", &dir.path().join("draft"), BuildMode::Draft)
    };
    let opts = BuildOptions {
        tracker: Some(server.url()),
        ..opts
    };
    assert_eq!(build(&opts, &mut sink()).unwrap().exit, Exit::Ok);
    assert_eq!(client.list().unwrap().len(), 1);
    server.stop();
}

#[test]
fn check_reports_to_tracker_and_warns_about_newer_versions() {
    let dir = tempfile::tempdir().unwrap();
    let server = ServerHandle::start(dir.path().join("state.json"), "127.0.0.1:0").unwrap();
    let url = server.url();
    let out10 = dir.path().join("a10");
    build(
        &publish_options(
            versioned(dir.path(), "icd-a", "1.0"),
            &out10,
            &url,
            "https://x/a/1.0/",
        ),
        &mut sink(),
    )
    .unwrap();
    build(
        &publish_options(
            versioned(dir.path(), "icd-a", "1.1"),
            &dir.path().join("a11"),
            &url,
            "https://x/a/1.1/",
        ),
        &mut sink(),
    )
    .unwrap();

    let header = out10.join("icd-a_pos.h");
    let mut bytes = std::fs::read(&header).unwrap();
    let last = bytes.len() - 2;
    bytes[last] ^= 0x20;
    std::fs::write(&header, bytes).unwrap();
    let opts = CheckOptions {
        manifest: out10.join("manifest.json").display().to_string(),
        local_dir: out10.clone(),
        tracker: Some(url.clone()),
        reporter: "dev-7".into(),
    };
    let mut out = sink();
    let result = check(&opts, &mut out).unwrap();
    assert_eq!(result.exit, Exit::Drift);
    assert_eq!(result.reported, 1);
    let text = String::from_utf8(out).unwrap();
    assert!(
        text.contains("warning: icd-a 1.1 is published; manifest is for 1.0"),
        "{text}"
    );
    let view = TrackerClient::new(&url)
        .get(&DocId::new("icd-a").unwrap())
        .unwrap()
        .unwrap();
    let checks: Vec<_> = view
        .events
        .iter()
        .filter_map(|e| match &e.kind {
            EventKind::CheckFailed { reporter, path, .. } => Some((reporter.clone(), path.clone())),
            _ => None,
        })
        .collect();
    assert_eq!(checks, [("dev-7".to_string(), "icd-a_pos.h".to_string())]);
    assert_eq!(view.record.status, Status::Published);
    server.stop();
}

#[test]
fn src_defaults_to_revision_file() {
    let dir = tempfile::tempdir().unwrap();
    let src = versioned(dir.path(), "icd-a", "1.0");
    let opts = BuildOptions {
        glossaries: vec![fixture("glossary.tsv")],
        ..BuildOptions::new(&src, dir.path().join("o1"), BuildMode::Draft)
    };
    assert_eq!(
        build(&opts, &mut sink()).unwrap().manifest.unwrap().src,
        "unversioned"
    );
    std::fs::write(dir.path().join("REVISION"), "9c1e77a\n").unwrap();
    assert_eq!(
        build(&opts, &mut sink()).unwrap().manifest.unwrap().src,
        "9c1e77a"
    );
}

#[test]
fn cli_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_icdoc");
    let dir = tempfile::tempdir().unwrap();
    let f = |n: &str| fixture(n).display().to_string();
    let run = |args: &[&str]| Command::new(bin).args(args).output().unwrap();

    let o = run(&[
        "gates",
        &f("clean.icd"),
        "--config",
        &f("config.toml"),
        "--glossary",
        &f("glossary.tsv"),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        String::from_utf8_lossy(&o.stdout),
        "PASS (0 errors, 0 warnings)\n"
    );

    let o = run(&[
        "gates",
        &f("gate-meta.icd"),
        "--config",
        &f("config.toml"),
        "--glossary",
        &f("glossary.tsv"),
    ]);
    assert_eq!(o.status.code(), Some(1));

    let out = dir.path().join("out").display().to_string();
    let o = run(&[
        "build",
        &f("clean.icd"),
        "--out",
        &out,
        "--mode",
        "publish",
        "--config",
        &f("config.toml"),
        "--glossary",
        &f("glossary.tsv"),
        "--history",
        &f("history.tsv"),
        "--src",
        "r1",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let manifest = format!("{out}/manifest.json");
    assert_eq!(
        run(&["check", "--manifest", &manifest, "--local", &out])
            .status
            .code(),
        Some(0)
    );
    std::fs::write(format!("{out}/lcu-status.html"), "tampered").unwrap();
    assert_eq!(
        run(&["check", "--manifest", &manifest, "--local", &out])
            .status
            .code(),
        Some(4)
    );

    let bad = dir.path().join("bad.icd");
    std::fs::write(&bad, "no title\n").unwrap();
    let o = run(&["gates", &bad.display().to_string()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    assert_eq!(run(&["gates", "/nonexistent/x.icd"]).status.code(), Some(3));
    assert_eq!(run(&["build", &f("clean.icd")]).status.code(), Some(3));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}
