//! Command-line front end: discovery, analysis, and scaffolding with stable
//! machine-readable output and CI-friendly exit codes.
//!
//! Exit codes: 0 clean, 1 findings (error-severity lint diagnostics or
//! breaking surface removals), 2 usage/config/IO failure.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use pimpl_sentinel_core::detect::{ImplPattern, PackageReports};
use pimpl_sentinel_core::diagnostics::{codes, Severity};
use pimpl_sentinel_core::graph::{find_cycles, EdgeNames, ModuleGraph};
use pimpl_sentinel_core::lint::{
    apply_suppressions, lint_package, lint_to_json, lint_to_text, LintConfig,
};
use pimpl_sentinel_core::parser::parse_module;
use pimpl_sentinel_core::pipeline::{analyze_path, Analysis};
use pimpl_sentinel_core::scaffold::{
    plan_class_split, render_scaffold, snake_case, write_files, ScaffoldOptions,
};
use pimpl_sentinel_core::source::{is_identifier, ModuleId, SourceFile};
use pimpl_sentinel_core::surface::{
    diff_surfaces, surface_from_json, surface_to_json, ApiSurface, SurfaceDiff,
    SURFACE_SCHEMA_VERSION,
};

#[derive(Parser)]
#[command(
    name = "pimpl-sentinel",
    about = "Detect, lint, and scaffold interface/implementation boundaries in Python packages",
    version = concat!(
        env!("CARGO_PKG_VERSION"),
        " (surface schema 1, lint schema 1)"
    )
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Lint a package for boundary violations (rules R001-R007).
    Lint(LintArgs),
    /// Extract the curated public API surface of a package.
    Surface(SurfaceArgs),
    /// Compare two extracted surface documents.
    Diff(DiffArgs),
    /// Report wrapper classes, backend factories, and wrapper modules.
    Detect(DetectArgs),
    /// Print the import graph, optionally its module-level cycles.
    Graph(GraphArgs),
    /// Generate interface/implementation scaffolds from a monolithic class.
    Scaffold(ScaffoldArgs),
}

#[derive(Args)]
struct LintArgs {
    /// Package root directory.
    path: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// JSON config file (rules, impl_attr_pattern, heavy_modules,
    /// delegation_threshold, public_roots).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Enable a rule on top of the configured set (repeatable).
    #[arg(long = "enable", value_name = "CODE")]
    enable: Vec<String>,
    /// Disable a rule (repeatable).
    #[arg(long = "disable", value_name = "CODE")]
    disable: Vec<String>,
    /// Extend R001 to all single-underscore attributes.
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SurfaceArgs {
    path: PathBuf,
    /// Emit the versioned JSON document.
    #[arg(long, conflicts_with = "text")]
    json: bool,
    /// Emit one line per exported symbol (default).
    #[arg(long)]
    text: bool,
}

#[derive(Args)]
struct DiffArgs {
    old: PathBuf,
    new: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Treat origin moves as breaking too.
    #[arg(long)]
    strict_moves: bool,
}

#[derive(Args)]
struct DetectArgs {
    path: PathBuf,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GraphArgs {
    path: PathBuf,
    #[arg(long)]
    json: bool,
    /// Print canonicalized module-level cycles, one per line.
    #[arg(long)]
    cycles: bool,
    /// Include deferred and conditional imports in cycle analysis.
    #[arg(long)]
    include_deferred: bool,
}

#[derive(Args)]
struct ScaffoldArgs {
    /// Source file containing the class to split.
    path: PathBuf,
    /// Class name to split into interface + implementation.
    class: String,
    /// Output directory for generated files.
    #[arg(long)]
    out: PathBuf,
    /// Add a backend binder branch, e.g. `email=EmailMessenger` (repeatable).
    #[arg(long = "factory", value_name = "LIT=BACKEND")]
    factory: Vec<String>,
    /// Add a lazy namespace entry, e.g. `array=._core:array` (repeatable).
    #[arg(long = "lazy", value_name = "NAME=MODULE:ATTR")]
    lazy: Vec<String>,
    /// Render the implementation import inside __init__ (cycle-safe).
    #[arg(long)]
    defer_import: bool,
    /// Replace existing output files.
    #[arg(long)]
    overwrite: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Lint(args) => cmd_lint(args),
        Command::Surface(args) => cmd_surface(args),
        Command::Diff(args) => cmd_diff(args),
        Command::Detect(args) => cmd_detect(args),
        Command::Graph(args) => cmd_graph(args),
        Command::Scaffold(args) => cmd_scaffold(args),
    }
}

fn load_analysis(path: &Path, pattern: &ImplPattern) -> Result<Analysis> {
    analyze_path(path, pattern).map_err(|err| anyhow!("{err}"))
}

fn cmd_lint(args: LintArgs) -> Result<ExitCode> {
    let mut config = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read config `{}`", path.display()))?;
            LintConfig::from_json(&text)
                .with_context(|| format!("invalid config `{}`", path.display()))?
        }
        None => LintConfig::default(),
    };
    if args.strict {
        config.strict = true;
    }
    for code in &args.enable {
        if args.disable.contains(code) {
            bail!("rule `{code}` is both enabled and disabled");
        }
    }
    for code in args.enable.iter().chain(args.disable.iter()) {
        if !codes::ALL_RULES.contains(&code.as_str()) {
            bail!("unknown rule id `{code}`");
        }
    }
    for code in &args.enable {
        config.rules.insert(code.clone());
    }
    for code in &args.disable {
        config.rules.remove(code);
    }

    let pattern = ImplPattern::new(&config.impl_attr_pattern)?;
    let analysis = load_analysis(&args.path, &pattern)?;
    let diagnostics = lint_package(
        &analysis.graph,
        &analysis.surface,
        &analysis.reports,
        &analysis.diagnostics,
        &config,
    );
    let (kept, summary) = apply_suppressions(diagnostics, &analysis.graph, &config);

    match args.format {
        Format::Text => {
            print!("{}", lint_to_text(&kept));
            println!("{} finding(s), {} suppressed", kept.len(), summary.total());
        }
        Format::Json => {
            println!(
                "{}",
                serde_json::to_string_pretty(&lint_to_json(&kept, &summary))?
            );
        }
    }
    let has_errors = kept.iter().any(|d| d.severity == Severity::Error);
    Ok(if has_errors {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn cmd_surface(args: SurfaceArgs) -> Result<ExitCode> {
    let analysis = load_analysis(&args.path, &ImplPattern::default())?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&surface_to_json(&analysis.surface))?
        );
    } else {
        print_surface_text(&analysis.surface);
    }
    Ok(ExitCode::SUCCESS)
}

fn print_surface_text(surface: &ApiSurface) {
    for (module, entries) in &surface.modules {
        for entry in entries {
            let origin = if entry.origin_name.is_empty() {
                entry.origin_module.dotted()
            } else {
                format!("{}:{}", entry.origin_module.dotted(), entry.origin_name)
            };
            let curated = if entry.curated { ", curated" } else { "" };
            println!(
                "{}: {} <- {} [{}{}]",
                module.dotted(),
                entry.public_name,
                origin,
                entry.binding.as_str(),
                curated
            );
        }
    }
}

fn load_surface(path: &Path) -> Result<ApiSurface> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("cannot read surface `{}`", path.display()))?;
    let value: serde_json::Value = serde_json::from_str(&text)
        .with_context(|| format!("`{}` is not valid JSON", path.display()))?;
    surface_from_json(&value).map_err(|err| anyhow!("`{}`: {err}", path.display()))
}

fn cmd_diff(args: DiffArgs) -> Result<ExitCode> {
    let old = load_surface(&args.old)?;
    let new = load_surface(&args.new)?;
    let diff = diff_surfaces(&old, &new);
    match args.format {
        Format::Text => print_diff_text(&diff),
        Format::Json => {
            let entry = |e: &pimpl_sentinel_core::surface::DiffEntry| {
                json!({"module": e.module, "name": e.name, "detail": e.detail})
            };
            let doc = json!({
                "version": SURFACE_SCHEMA_VERSION,
                "added": diff.added.iter().map(entry).collect::<Vec<_>>(),
                "removed": diff.removed.iter().map(entry).collect::<Vec<_>>(),
                "origin_moved": diff.origin_moved.iter().map(entry).collect::<Vec<_>>(),
                "unchanged": diff.unchanged.iter().map(entry).collect::<Vec<_>>(),
            });
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    let breaking = diff.is_breaking() || (args.strict_moves && !diff.origin_moved.is_empty());
    Ok(if breaking {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn print_diff_text(diff: &SurfaceDiff) {
    for entry in &diff.removed {
        println!("removed   {}.{} ({})", entry.module, entry.name, entry.detail);
    }
    for entry in &diff.added {
        println!("added     {}.{} ({})", entry.module, entry.name, entry.detail);
    }
    for entry in &diff.origin_moved {
        println!("moved     {}.{} ({})", entry.module, entry.name, entry.detail);
    }
    println!(
        "{} removed, {} added, {} moved, {} unchanged",
        diff.removed.len(),
        diff.added.len(),
        diff.origin_moved.len(),
        diff.unchanged.len()
    );
}

fn cmd_detect(args: DetectArgs) -> Result<ExitCode> {
    let analysis = load_analysis(&args.path, &ImplPattern::default())?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&reports_to_json(&analysis.reports))?
        );
    } else {
        print_reports_text(&analysis.reports);
    }
    Ok(ExitCode::SUCCESS)
}

fn reports_to_json(reports: &PackageReports) -> serde_json::Value {
    let classes: Vec<serde_json::Value> = reports
        .classes
        .iter()
        .map(|(module, r)| {
            json!({
                "module": module.dotted(),
                "class": r.class_name,
                "impl_attr": r.impl_attr,
                "line": r.class_span.start_line,
                "construction_sites": r.construction_sites.iter().map(|s| s.start_line).collect::<Vec<_>>(),
                "delegating": r.delegating_methods.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
                "guarded": r.guarded_delegations.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
                "non_delegating": r.non_delegating_public,
                "coverage": r.coverage,
            })
        })
        .collect();
    let factories: Vec<serde_json::Value> = reports
        .factories
        .iter()
        .map(|(module, r)| {
            json!({
                "module": module.dotted(),
                "selector": r.selector,
                "parameter": r.parameter,
                "line": r.selector_span.start_line,
                "branches": r.branches.iter().map(|(l, c)| json!([l, c])).collect::<Vec<_>>(),
                "fallback": if r.fallback_raises { "raise" } else { "none" },
            })
        })
        .collect();
    let modules: Vec<serde_json::Value> = reports
        .modules
        .iter()
        .map(|r| {
            json!({
                "module": r.public_module.dotted(),
                "backing_modules": r.backing_modules.iter().map(|m| m.dotted()).collect::<Vec<_>>(),
                "rebound": r.rebound_names.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({
        "version": 1,
        "class_pimpl": classes,
        "factories": factories,
        "module_pimpl": modules,
    })
}

fn print_reports_text(reports: &PackageReports) {
    for (module, r) in &reports.classes {
        let delegated = r.delegating_methods.len() + r.guarded_delegations.len();
        let public = delegated + r.non_delegating_public.len();
        println!(
            "class-pimpl {}:{} impl_attr={} coverage={}/{}",
            module.dotted(),
            r.class_name,
            r.impl_attr,
            delegated,
            public
        );
    }
    for (module, r) in &reports.factories {
        let branches = r
            .branches
            .iter()
            .map(|(l, c)| format!("{l}->{c}"))
            .collect::<Vec<_>>()
            .join(", ");
        println!(
            "factory {}:{} param={} branches=[{}] fallback={}",
            module.dotted(),
            r.selector,
            r.parameter,
            branches,
            if r.fallback_raises { "raise" } else { "none" }
        );
    }
    for r in &reports.modules {
        let backing = r
            .backing_modules
            .iter()
            .map(|m| m.dotted())
            .collect::<Vec<_>>()
            .join(", ");
        println!(
            "module-pimpl {} backing=[{}] rebound={}",
            r.public_module.dotted(),
            backing,
            r.rebound_names.len()
        );
    }
}

fn cmd_graph(args: GraphArgs) -> Result<ExitCode> {
    let analysis = load_analysis(&args.path, &ImplPattern::default())?;
    let graph = &analysis.graph;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&graph_to_json(
                graph,
                args.cycles,
                args.include_deferred
            ))?
        );
    } else if args.cycles {
        for cycle in find_cycles(graph, args.include_deferred) {
            let path = cycle
                .iter()
                .map(|m| m.dotted())
                .collect::<Vec<_>>()
                .join(" -> ");
            println!("{path}");
        }
    } else {
        for edge in &graph.edges {
            println!(
                "{} -> {} [{}]",
                edge.from.dotted(),
                edge.to.dotted(),
                edge.kind.as_str()
            );
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn graph_to_json(graph: &ModuleGraph, cycles: bool, include_deferred: bool) -> serde_json::Value {
    let edges: Vec<serde_json::Value> = graph
        .edges
        .iter()
        .map(|e| {
            let names = match &e.names {
                EdgeNames::Module { alias } => json!({"module": true, "alias": alias}),
                EdgeNames::Named(list) => {
                    json!(list.iter().map(|(n, a)| json!([n, a])).collect::<Vec<_>>())
                }
                EdgeNames::Star => json!("*"),
            };
            json!({
                "from": e.from.dotted(),
                "to": e.to.dotted(),
                "kind": e.kind.as_str(),
                "external": e.external,
                "line": e.span.start_line,
                "names": names,
            })
        })
        .collect();
    let mut doc = json!({
        "version": 1,
        "modules": graph.modules.keys().map(|m| m.dotted()).collect::<Vec<_>>(),
        "edges": edges,
    });
    if cycles {
        doc["cycles"] = json!(find_cycles(graph, include_deferred)
            .iter()
            .map(|c| c.iter().map(|m| m.dotted()).collect::<Vec<_>>())
            .collect::<Vec<_>>());
    }
    doc
}

fn cmd_scaffold(args: ScaffoldArgs) -> Result<ExitCode> {
    let text = fs::read_to_string(&args.path)
        .with_context(|| format!("cannot read `{}`", args.path.display()))?;
    let stem = args
        .path
        .file_stem()
        .map(|s| s.to_string_lossy().to_string())
        .unwrap_or_default();
    if !is_identifier(&stem) {
        bail!("`{}` is not a valid module file name", args.path.display());
    }
    let module_id = ModuleId::from_dotted(&stem).expect("validated identifier");
    let parsed = parse_module(SourceFile::new(args.path.clone(), module_id, text));

    let mut options = ScaffoldOptions {
        defer_import: args.defer_import,
        ..ScaffoldOptions::default()
    };
    if !args.factory.is_empty() {
        let mut backends = Vec::new();
        for spec in &args.factory {
            let (literal, class) = spec
                .split_once('=')
                .ok_or_else(|| anyhow!("--factory expects LIT=BACKEND, got `{spec}`"))?;
            let module = format!("impl.{}", snake_case(class));
            backends.push((literal.to_string(), class.to_string(), module));
        }
        options.factory = Some(backends);
    }
    if !args.lazy.is_empty() {
        let mut entries = Vec::new();
        for spec in &args.lazy {
            let (name, rest) = spec
                .split_once('=')
                .ok_or_else(|| anyhow!("--lazy expects NAME=MODULE:ATTR, got `{spec}`"))?;
            let (module, attr) = rest
                .split_once(':')
                .ok_or_else(|| anyhow!("--lazy expects NAME=MODULE:ATTR, got `{spec}`"))?;
            entries.push((name.to_string(), module.to_string(), attr.to_string()));
        }
        options.lazy_entries = Some(entries);
    }

    let plan = plan_class_split(&parsed, &args.class, &options)?;
    let files = render_scaffold(&plan)?;
    let written = write_files(&files, &args.out, args.overwrite)?;
    let manifest = json!({
        "version": 1,
        "created": written
            .iter()
            .map(|p| p.display().to_string())
            .collect::<Vec<_>>(),
    });
    println!("{}", serde_json::to_string_pretty(&manifest)?);
    Ok(ExitCode::SUCCESS)
}
