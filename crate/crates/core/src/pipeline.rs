//! End-to-end analysis: discovery, parsing, graph assembly, surface
//! extraction, and detector runs in one pass over a root directory.

use std::path::Path;

use crate::detect::{detect_package, ImplPattern, PackageReports};
use crate::diagnostics::Diagnostic;
use crate::graph::{build_graph, discover_package, DiscoverError, ModuleGraph};
use crate::parser::parse_module;
use crate::surface::{extract_surface, ApiSurface};

/// Everything downstream consumers need: the graph, the surface, detector
/// reports, and the accumulated non-rule diagnostics.
pub struct Analysis {
    pub graph: ModuleGraph,
    pub surface: ApiSurface,
    pub reports: PackageReports,
    /// Discovery, parse, resolution, and surface diagnostics.
    pub diagnostics: Vec<Diagnostic>,
}

pub fn analyze_path(root: &Path, pattern: &ImplPattern) -> Result<Analysis, DiscoverError> {
    let discovered = discover_package(root)?;
    let mut diagnostics = discovered.diagnostics;
    let parsed = discovered.files.into_iter().map(parse_module).collect();
    let graph = build_graph(parsed);
    diagnostics.extend(graph.diagnostics.iter().cloned());
    let (surface, surface_diags) = extract_surface(&graph);
    diagnostics.extend(surface_diags);
    let reports = detect_package(&graph, pattern);
    Ok(Analysis {
        graph,
        surface,
        reports,
        diagnostics,
    })
}
