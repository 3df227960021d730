//! Per-subcommand behavior checks: output formats, scaffolding flags, and
//! file-collision handling.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_pimpl-sentinel"))
}

fn stdout_of(output: &std::process::Output) -> String {
    String::from_utf8_lossy(&output.stdout).to_string()
}

#[test]
fn graph_text_lines_use_the_arrow_format() {
    let out = bin()
        .args(["graph", fixtures().join("listings").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = stdout_of(&out);
    assert!(text.contains("widget -> impl._widget [module_level]"));
    assert!(text.contains("mylib -> mylib._core [deferred]"));
    for line in text.lines() {
        assert!(
            line.contains(" -> ") && line.ends_with(']'),
            "bad graph line: {line}"
        );
    }
}

#[test]
fn graph_cycles_prints_one_canonical_cycle_per_line() {
    let out = bin()
        .args([
            "graph",
            fixtures().join("packages/leaky_pkg").to_str().unwrap(),
            "--cycles",
        ])
        .output()
        .unwrap();
    assert_eq!(stdout_of(&out).trim(), "cyc_a -> cyc_b");
}

#[test]
fn graph_json_marks_external_edges() {
    let out = bin()
        .args([
            "graph",
            fixtures().join("packages/leaky_pkg").to_str().unwrap(),
            "--json",
        ])
        .output()
        .unwrap();
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let edges = doc["edges"].as_array().unwrap();
    let numpy = edges
        .iter()
        .find(|e| e["to"] == "numpy")
        .expect("numpy edge present");
    assert_eq!(numpy["external"], true);
    let core = edges
        .iter()
        .find(|e| e["to"] == "mylib._core" && e["from"] == "mylib")
        .unwrap();
    assert_eq!(core["external"], false);
}

#[test]
fn lint_text_format_reports_line_and_code() {
    let out = bin()
        .args([
            "lint",
            fixtures().join("packages/leaky_pkg").to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let text = stdout_of(&out);
    assert!(text.contains("client:8:5: error R001"));
    assert!(text.lines().last().unwrap().contains("finding(s)"));
}

#[test]
fn suppression_markers_count_in_the_summary() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("widgetlib.py"),
        "class _Impl:\n    def start(self):\n        pass\n\nclass Widget:\n    def __init__(self):\n        self._impl = _Impl()\n\n    def start(self):\n        return self._impl.start()\n",
    )
    .unwrap();
    fs::write(
        tmp.path().join("client.py"),
        "import widgetlib\n\ndef use():\n    w = widgetlib.Widget()\n    w._impl.start()  # pimpl: allow(R001)\n",
    )
    .unwrap();
    let out = bin()
        .args([
            "lint",
            tmp.path().to_str().unwrap(),
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "suppressed finding clears exit");
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(doc["diagnostics"].as_array().unwrap().len(), 0);
    assert_eq!(doc["summary"]["suppressed"]["R001"], 1);
}

#[test]
fn disable_flag_silences_a_rule() {
    let out = bin()
        .args([
            "lint",
            fixtures().join("packages/leaky_pkg").to_str().unwrap(),
            "--disable",
            "R001",
            "--disable",
            "R002",
            "--disable",
            "R003",
            "--format",
            "json",
        ])
        .output()
        .unwrap();
    // Remaining findings are warnings/info only.
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    for diag in doc["diagnostics"].as_array().unwrap() {
        assert!(!matches!(
            diag["code"].as_str().unwrap(),
            "R001" | "R002" | "R003"
        ));
    }
}

#[test]
fn scaffold_writes_manifest_and_respects_collisions() {
    let tmp = tempfile::tempdir().unwrap();
    let source = tmp.path().join("service.py");
    fs::write(
        &source,
        "class Service:\n    def __init__(self, cfg):\n        self._cfg = cfg\n\n    def ping(self):\n        return self._cfg\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("out");

    let first = bin()
        .args([
            "scaffold",
            source.to_str().unwrap(),
            "Service",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&first.stdout).unwrap();
    let created: Vec<String> = manifest["created"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(created.len(), 3);
    assert!(created.iter().any(|p| p.ends_with("service.py")));
    assert!(created.iter().any(|p| p.ends_with("impl/_service.py")));
    for path in &created {
        assert!(Path::new(path).is_file());
    }

    // Second run without --overwrite refuses; with it, succeeds.
    let collision = bin()
        .args([
            "scaffold",
            source.to_str().unwrap(),
            "Service",
            "--out",
            out_dir.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(collision.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&collision.stderr).contains("overwrite"));

    let overwrite = bin()
        .args([
            "scaffold",
            source.to_str().unwrap(),
            "Service",
            "--out",
            out_dir.to_str().unwrap(),
            "--overwrite",
        ])
        .output()
        .unwrap();
    assert_eq!(overwrite.status.code(), Some(0));
}

#[test]
fn scaffold_factory_and_lazy_flags_emit_extra_files() {
    let tmp = tempfile::tempdir().unwrap();
    let source = tmp.path().join("processor.py");
    fs::write(
        &source,
        "class Processor:\n    def __init__(self):\n        self._mode = \"idle\"\n\n    def run(self, job):\n        self._mode = \"busy\"\n        return job\n",
    )
    .unwrap();
    let out_dir = tmp.path().join("pkg");
    let out = bin()
        .args([
            "scaffold",
            source.to_str().unwrap(),
            "Processor",
            "--out",
            out_dir.to_str().unwrap(),
            "--factory",
            "fast=FastEngine",
            "--factory",
            "small=SmallEngine",
            "--lazy",
            "run_job=._processor:run_job",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let factory = fs::read_to_string(out_dir.join("processor_factory.py")).unwrap();
    assert!(factory.contains("import impl.fast_engine as fast_engine"));
    assert!(factory.contains("elif backend_type.lower() == \"small\":"));
    let lazy = fs::read_to_string(out_dir.join("__init__.py")).unwrap();
    assert!(lazy.contains("__all__ = [\"run_job\"]"));
    assert!(lazy.contains("from ._processor import run_job"));

    // A single factory backend is a refusal (exit 2).
    let refusal = bin()
        .args([
            "scaffold",
            source.to_str().unwrap(),
            "Processor",
            "--out",
            tmp.path().join("pkg2").to_str().unwrap(),
            "--factory",
            "only=OnlyEngine",
        ])
        .output()
        .unwrap();
    assert_eq!(refusal.status.code(), Some(2));
}

#[test]
fn scaffold_refuses_classes_that_already_delegate() {
    let out = bin()
        .args([
            "scaffold",
            fixtures().join("listings/widget.py").to_str().unwrap(),
            "Widget",
            "--out",
            tempfile::tempdir().unwrap().path().to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("already delegates"));
}

#[test]
fn surface_text_and_json_flags_conflict() {
    let out = bin()
        .args([
            "surface",
            fixtures().join("listings").to_str().unwrap(),
            "--json",
            "--text",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn diff_strict_moves_flag_turns_moves_breaking() {
    let tmp = tempfile::tempdir().unwrap();
    let mut paths = Vec::new();
    for (name, fixture) in [("v1", "packages/rename_v1"), ("v2", "packages/rename_v2")] {
        let out = bin()
            .args([
                "surface",
                fixtures().join(fixture).to_str().unwrap(),
                "--json",
            ])
            .output()
            .unwrap();
        let path = tmp.path().join(format!("{name}.json"));
        fs::write(&path, &out.stdout).unwrap();
        paths.push(path);
    }
    let relaxed = bin()
        .args([
            "diff",
            paths[0].to_str().unwrap(),
            paths[1].to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert_eq!(relaxed.status.code(), Some(0));
    let strict = bin()
        .args([
            "diff",
            paths[0].to_str().unwrap(),
            paths[1].to_str().unwrap(),
            "--strict-moves",
        ])
        .output()
        .unwrap();
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn diff_rejects_bad_surface_documents() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.json");
    fs::write(&bad, "{\"version\": 99, \"modules\": {}}").unwrap();
    let good = tmp.path().join("good.json");
    fs::write(&good, "{\"version\": 1, \"modules\": {}}").unwrap();
    let out = bin()
        .args(["diff", bad.to_str().unwrap(), good.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
