//! Package discovery, import resolution, and module-level cycle analysis.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::ast::{ImportDecl, NodeKind, SyntaxNode};
use crate::diagnostics::{codes, Diagnostic, Severity};
use crate::parser::{parse_module, ParsedModule};
use crate::source::{is_identifier, ModuleId, SourceFile, Span};

/// Files larger than this are skipped with a diagnostic.
pub const MAX_FILE_SIZE: u64 = 1024 * 1024;

#[derive(Debug, Error)]
pub enum DiscoverError {
    #[error("root `{0}` is not a readable directory")]
    BadRoot(PathBuf),
    #[error("io error under `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// When an import statement executes relative to module load.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ImportKind {
    ModuleLevel,
    Deferred,
    Conditional,
}

impl ImportKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ImportKind::ModuleLevel => "module_level",
            ImportKind::Deferred => "deferred",
            ImportKind::Conditional => "conditional",
        }
    }
}

/// Names an import statement binds locally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeNames {
    /// Whole-module binding (`import a.b [as c]`).
    Module { alias: Option<String> },
    /// `from m import a [as b], ...` as (name, alias) pairs.
    Named(Vec<(String, Option<String>)>),
    Star,
}

#[derive(Clone, Debug)]
pub struct ImportEdge {
    pub from: ModuleId,
    pub to: ModuleId,
    /// Target does not resolve inside the analyzed root.
    pub external: bool,
    pub kind: ImportKind,
    pub names: EdgeNames,
    pub span: Span,
}

#[derive(Debug, Default)]
pub struct ModuleGraph {
    pub modules: BTreeMap<ModuleId, ParsedModule>,
    pub edges: Vec<ImportEdge>,
    pub diagnostics: Vec<Diagnostic>,
}

impl ModuleGraph {
    pub fn contains(&self, id: &ModuleId) -> bool {
        self.modules.contains_key(id)
    }

    pub fn edges_from<'a>(&'a self, from: &'a ModuleId) -> impl Iterator<Item = &'a ImportEdge> {
        self.edges.iter().filter(move |e| &e.from == from)
    }
}

/// Result of walking a root directory for `.py` files.
pub struct Discovered {
    pub files: Vec<SourceFile>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Discovers modules under `root`. Package directories need an `__init__.py`
/// to contribute; hidden directories are skipped. If the root itself contains
/// an `__init__.py`, the root directory name becomes the top-level package.
pub fn discover_package(root: &Path) -> Result<Discovered, DiscoverError> {
    if !root.is_dir() {
        return Err(DiscoverError::BadRoot(root.to_path_buf()));
    }
    let mut files = Vec::new();
    let mut diagnostics = Vec::new();
    let mut prefix: Vec<String> = Vec::new();
    let root_name = root
        .file_name()
        .map(|n| n.to_string_lossy().to_string())
        .unwrap_or_default();
    if root.join("__init__.py").is_file() {
        if is_identifier(&root_name) {
            prefix.push(root_name);
        } else {
            diagnostics.push(infra_diag(
                codes::INVALID_MODULE_NAME,
                format!("root package directory `{root_name}` is not a valid module name"),
            ));
        }
    }
    walk_dir(root, root, &prefix, &mut files, &mut diagnostics)?;
    files.sort_by(|a, b| a.module_id.cmp(&b.module_id));
    Ok(Discovered { files, diagnostics })
}

fn walk_dir(
    root: &Path,
    dir: &Path,
    prefix: &[String],
    files: &mut Vec<SourceFile>,
    diagnostics: &mut Vec<Diagnostic>,
) -> Result<(), DiscoverError> {
    let entries = fs::read_dir(dir).map_err(|source| DiscoverError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut names: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    names.sort();
    for path in names {
        let file_name = match path.file_name() {
            Some(n) => n.to_string_lossy().to_string(),
            None => continue,
        };
        if path.is_dir() {
            if file_name.starts_with('.') {
                continue;
            }
            if !path.join("__init__.py").is_file() {
                if dir_contains_py(&path) {
                    diagnostics.push(infra_diag(
                        codes::MISSING_INIT,
                        format!(
                            "directory `{}` has no __init__.py; its files are not analyzed",
                            rel_display(root, &path)
                        ),
                    ));
                }
                continue;
            }
            if !is_identifier(&file_name) {
                diagnostics.push(infra_diag(
                    codes::INVALID_MODULE_NAME,
                    format!("package directory `{file_name}` is not a valid module name"),
                ));
                continue;
            }
            let mut sub_prefix = prefix.to_vec();
            sub_prefix.push(file_name);
            walk_dir(root, &path, &sub_prefix, files, diagnostics)?;
            continue;
        }
        if path.extension().map(|e| e != "py").unwrap_or(true) {
            continue;
        }
        let stem = file_name.trim_end_matches(".py").to_string();
        let mut components = prefix.to_vec();
        if stem != "__init__" {
            if !is_identifier(&stem) {
                diagnostics.push(infra_diag(
                    codes::INVALID_MODULE_NAME,
                    format!("file `{file_name}` is not a valid module name"),
                ));
                continue;
            }
            components.push(stem);
        } else if components.is_empty() {
            // An __init__.py directly under an unnamed root was already
            // reported when the prefix was computed.
            continue;
        }
        let module_id = match ModuleId::new(components) {
            Some(id) => id,
            None => continue,
        };
        let size = fs::metadata(&path)
            .map(|m| m.len())
            .map_err(|source| DiscoverError::Io {
                path: path.clone(),
                source,
            })?;
        if size > MAX_FILE_SIZE {
            diagnostics.push(module_diag(
                codes::FILE_TOO_LARGE,
                module_id.clone(),
                format!(
                    "`{}` is {size} bytes (limit {MAX_FILE_SIZE}); skipped",
                    rel_display(root, &path)
                ),
            ));
            continue;
        }
        match fs::read_to_string(&path) {
            Ok(text) => {
                let rel = path.strip_prefix(root).unwrap_or(&path).to_path_buf();
                files.push(SourceFile::new(rel, module_id, text));
            }
            Err(err) => {
                diagnostics.push(module_diag(
                    codes::UNREADABLE_FILE,
                    module_id,
                    format!("cannot read `{}`: {err}", rel_display(root, &path)),
                ));
            }
        }
    }
    Ok(())
}

fn dir_contains_py(dir: &Path) -> bool {
    fs::read_dir(dir)
        .map(|entries| {
            entries
                .flatten()
                .any(|e| e.path().extension().map(|x| x == "py").unwrap_or(false))
        })
        .unwrap_or(false)
}

fn rel_display(root: &Path, path: &Path) -> String {
    path.strip_prefix(root)
        .unwrap_or(path)
        .display()
        .to_string()
}

fn infra_diag(code: &'static str, message: String) -> Diagnostic {
    Diagnostic::new(
        code,
        Severity::Warning,
        ModuleId::from_dotted("__root__").unwrap(),
        Span::default(),
        message,
    )
}

fn module_diag(code: &'static str, module: ModuleId, message: String) -> Diagnostic {
    Diagnostic::new(code, Severity::Warning, module, Span::default(), message)
}

/// Resolution outcome for one import target.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Resolved {
    Internal(ModuleId),
    External(ModuleId),
}

impl Resolved {
    pub fn module(&self) -> &ModuleId {
        match self {
            Resolved::Internal(m) | Resolved::External(m) => m,
        }
    }

    pub fn is_external(&self) -> bool {
        matches!(self, Resolved::External(_))
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ResolveError {
    #[error("relative import level {level} exceeds the depth of `{current}`")]
    LevelTooDeep { level: u32, current: String },
    #[error("import path is empty")]
    EmptyPath,
}

/// Resolves a dotted import path against the analyzed module set.
///
/// Relative imports anchor at the current package: the package itself for an
/// `__init__` module, the parent otherwise; each additional dot strips one
/// more component. Absolute paths resolve inside the analyzed root first and
/// fall back to an external marker.
pub fn resolve_import_path(
    level: u32,
    path: &[String],
    current: &ModuleId,
    current_is_package: bool,
    known: &BTreeSet<ModuleId>,
) -> Result<Resolved, ResolveError> {
    let mut components: Vec<String> = if level == 0 {
        Vec::new()
    } else {
        let mut base = current.components().to_vec();
        if !current_is_package {
            base.pop();
        }
        for _ in 1..level {
            if base.pop().is_none() {
                return Err(ResolveError::LevelTooDeep {
                    level,
                    current: current.dotted(),
                });
            }
        }
        if base.is_empty() && level > 1 {
            return Err(ResolveError::LevelTooDeep {
                level,
                current: current.dotted(),
            });
        }
        base
    };
    components.extend(path.iter().cloned());
    let id = ModuleId::new(components).ok_or(ResolveError::EmptyPath)?;
    if known.contains(&id) {
        Ok(Resolved::Internal(id))
    } else {
        Ok(Resolved::External(id))
    }
}

/// Resolves every target of one `Import`/`ImportFrom` statement.
pub fn resolve_import(
    stmt: &SyntaxNode,
    current: &ModuleId,
    current_is_package: bool,
    known: &BTreeSet<ModuleId>,
) -> Vec<Result<Resolved, ResolveError>> {
    let Some(decl) = stmt.import_decl() else {
        return Vec::new();
    };
    if decl.from_import {
        vec![resolve_import_path(
            decl.level,
            &decl.module,
            current,
            current_is_package,
            known,
        )]
    } else {
        decl.names
            .iter()
            .map(|alias| resolve_import_path(0, &alias.path, current, current_is_package, known))
            .collect()
    }
}

/// Builds the import graph from parsed modules. One edge per imported module
/// target, ordered by (from, span).
pub fn build_graph(parsed: Vec<ParsedModule>) -> ModuleGraph {
    let mut graph = ModuleGraph::default();
    let known: BTreeSet<ModuleId> = parsed.iter().map(|p| p.file.module_id.clone()).collect();
    for module in &parsed {
        let current = module.file.module_id.clone();
        let is_package = module.file.is_package();
        let mut collector = EdgeCollector {
            current: &current,
            is_package,
            known: &known,
            edges: &mut graph.edges,
            diagnostics: &mut graph.diagnostics,
        };
        collector.collect(&module.tree.children, Context::TopLevel);
    }
    graph
        .edges
        .sort_by(|a, b| (&a.from, a.span.start_offset).cmp(&(&b.from, b.span.start_offset)));
    for module in parsed {
        graph
            .diagnostics
            .extend(module.diagnostics.iter().cloned());
        graph.modules.insert(module.file.module_id.clone(), module);
    }
    graph
}

#[derive(Clone, Copy, PartialEq)]
enum Context {
    TopLevel,
    InConditional,
    InFunction,
}

struct EdgeCollector<'a> {
    current: &'a ModuleId,
    is_package: bool,
    known: &'a BTreeSet<ModuleId>,
    edges: &'a mut Vec<ImportEdge>,
    diagnostics: &'a mut Vec<Diagnostic>,
}

impl<'a> EdgeCollector<'a> {
    fn collect(&mut self, stmts: &[SyntaxNode], ctx: Context) {
        for stmt in stmts {
            match stmt.kind {
                NodeKind::Import | NodeKind::ImportFrom => self.record(stmt, ctx),
                NodeKind::FunctionDef => {
                    self.collect(
                        &stmt
                            .func_body()
                            .into_iter()
                            .cloned()
                            .collect::<Vec<_>>(),
                        Context::InFunction,
                    );
                }
                NodeKind::ClassDef => {
                    // Class bodies execute at module load; imports there keep
                    // the enclosing timing class.
                    self.collect(
                        &stmt
                            .class_body()
                            .into_iter()
                            .cloned()
                            .collect::<Vec<_>>(),
                        ctx,
                    );
                }
                NodeKind::If => {
                    let next = if ctx == Context::InFunction {
                        Context::InFunction
                    } else {
                        Context::InConditional
                    };
                    self.collect(stmt.if_body(), next);
                    self.collect(stmt.if_orelse(), next);
                }
                _ => {}
            }
        }
    }

    fn record(&mut self, stmt: &SyntaxNode, ctx: Context) {
        let Some(decl) = stmt.import_decl() else {
            return;
        };
        let kind = match ctx {
            Context::TopLevel => ImportKind::ModuleLevel,
            Context::InConditional => ImportKind::Conditional,
            Context::InFunction => ImportKind::Deferred,
        };
        if decl.from_import {
            self.record_from_import(stmt, decl, kind);
        } else {
            self.record_plain_import(stmt, decl, kind);
        }
    }

    fn record_plain_import(&mut self, stmt: &SyntaxNode, decl: &ImportDecl, kind: ImportKind) {
        for alias in &decl.names {
            match resolve_import_path(0, &alias.path, self.current, self.is_package, self.known) {
                Ok(resolved) => {
                    self.edges.push(ImportEdge {
                        from: self.current.clone(),
                        to: resolved.module().clone(),
                        external: resolved.is_external(),
                        kind,
                        names: EdgeNames::Module {
                            alias: alias.alias.clone(),
                        },
                        span: stmt.span,
                    });
                }
                Err(err) => self.resolve_diag(stmt, err),
            }
        }
    }

    fn record_from_import(&mut self, stmt: &SyntaxNode, decl: &ImportDecl, kind: ImportKind) {
        let resolved = match resolve_import_path(
            decl.level,
            &decl.module,
            self.current,
            self.is_package,
            self.known,
        ) {
            Ok(resolved) => resolved,
            Err(err) => {
                self.resolve_diag(stmt, err);
                return;
            }
        };
        let from_module = resolved.module().clone();
        let names = if decl.star {
            EdgeNames::Star
        } else {
            EdgeNames::Named(
                decl.names
                    .iter()
                    .filter_map(|a| {
                        a.path
                            .last()
                            .map(|n| (n.clone(), a.alias.clone()))
                    })
                    .collect(),
            )
        };
        if &from_module != self.current {
            self.edges.push(ImportEdge {
                from: self.current.clone(),
                to: from_module.clone(),
                external: resolved.is_external(),
                kind,
                names,
                span: stmt.span,
            });
        }
        // `from pkg import sub` where `sub` is a known submodule also loads
        // the submodule; record that edge so cycles through it are visible.
        if !decl.star && !resolved.is_external() {
            for alias in &decl.names {
                if let Some(name) = alias.path.last() {
                    if let Some(child) = from_module.child(name) {
                        if self.known.contains(&child) && &child != self.current {
                            self.edges.push(ImportEdge {
                                from: self.current.clone(),
                                to: child,
                                external: false,
                                kind,
                                names: EdgeNames::Module {
                                    alias: alias.alias.clone(),
                                },
                                span: stmt.span,
                            });
                        }
                    }
                }
            }
        }
    }

    fn resolve_diag(&mut self, stmt: &SyntaxNode, err: ResolveError) {
        self.diagnostics.push(Diagnostic::new(
            codes::UNRESOLVED_IMPORT,
            Severity::Warning,
            self.current.clone(),
            stmt.span,
            err.to_string(),
        ));
    }
}

/// Strongly connected components with two or more members, plus self-loops,
/// over the selected edge kinds. Each cycle lists its members sorted, so it
/// starts at the lexicographically smallest module; cycles are ordered by
/// first member.
pub fn find_cycles(graph: &ModuleGraph, include_deferred: bool) -> Vec<Vec<ModuleId>> {
    let nodes: Vec<&ModuleId> = graph.modules.keys().collect();
    let index_of: BTreeMap<&ModuleId, usize> =
        nodes.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
    let mut self_loop = vec![false; nodes.len()];
    for edge in &graph.edges {
        if edge.external {
            continue;
        }
        if edge.kind != ImportKind::ModuleLevel && !include_deferred {
            continue;
        }
        let (Some(&from), Some(&to)) = (index_of.get(&edge.from), index_of.get(&edge.to)) else {
            continue;
        };
        if from == to {
            self_loop[from] = true;
        }
        adj[from].push(to);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }

    let sccs = tarjan_sccs(&adj);
    let mut cycles: Vec<Vec<ModuleId>> = Vec::new();
    for scc in sccs {
        if scc.len() >= 2 || (scc.len() == 1 && self_loop[scc[0]]) {
            let mut members: Vec<ModuleId> = scc.iter().map(|&i| nodes[i].clone()).collect();
            members.sort();
            cycles.push(members);
        }
    }
    cycles.sort();
    cycles
}

/// Iterative Tarjan SCC.
fn tarjan_sccs(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut index = vec![usize::MAX; n];
    let mut lowlink = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_index = 0usize;
    let mut sccs: Vec<Vec<usize>> = Vec::new();
    // Work items: (node, next child position).
    let mut work: Vec<(usize, usize)> = Vec::new();

    for start in 0..n {
        if index[start] != usize::MAX {
            continue;
        }
        work.push((start, 0));
        while let Some(&mut (node, ref mut child_pos)) = work.last_mut() {
            if *child_pos == 0 {
                index[node] = next_index;
                lowlink[node] = next_index;
                next_index += 1;
                stack.push(node);
                on_stack[node] = true;
            }
            if let Some(&child) = adj[node].get(*child_pos) {
                *child_pos += 1;
                if index[child] == usize::MAX {
                    work.push((child, 0));
                } else if on_stack[child] {
                    lowlink[node] = lowlink[node].min(index[child]);
                }
                continue;
            }
            work.pop();
            if let Some(&(parent, _)) = work.last() {
                lowlink[parent] = lowlink[parent].min(lowlink[node]);
            }
            if lowlink[node] == index[node] {
                let mut scc = Vec::new();
                loop {
                    let member = stack.pop().unwrap();
                    on_stack[member] = false;
                    scc.push(member);
                    if member == node {
                        break;
                    }
                }
                sccs.push(scc);
            }
        }
    }
    sccs
}

/// Parses a set of source files and assembles the import graph.
pub fn parse_and_build(files: Vec<SourceFile>) -> ModuleGraph {
    let parsed: Vec<ParsedModule> = files.into_iter().map(parse_module).collect();
    build_graph(parsed)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synth(module: &str, text: &str) -> SourceFile {
        SourceFile::new(
            format!("{}.py", module.replace('.', "/")),
            ModuleId::from_dotted(module).unwrap(),
            text,
        )
    }

    fn known(ids: &[&str]) -> BTreeSet<ModuleId> {
        ids.iter()
            .map(|s| ModuleId::from_dotted(s).unwrap())
            .collect()
    }

    #[test]
    fn relative_import_resolves_against_package() {
        let known = known(&["mylib", "mylib._core"]);
        let current = ModuleId::from_dotted("mylib").unwrap();
        let resolved = resolve_import_path(1, &["_core".to_string()], &current, true, &known);
        assert_eq!(
            resolved,
            Ok(Resolved::Internal(
                ModuleId::from_dotted("mylib._core").unwrap()
            ))
        );
    }

    #[test]
    fn double_dot_strips_module_and_one_package() {
        // Verified against reference-interpreter resolution on a scratch
        // package: `from ..x import y` inside pkg.sub.mod targets pkg.x.
        let known = known(&["pkg", "pkg.sub", "pkg.sub.mod", "pkg.x"]);
        let current = ModuleId::from_dotted("pkg.sub.mod").unwrap();
        let resolved = resolve_import_path(2, &["x".to_string()], &current, false, &known);
        assert_eq!(
            resolved,
            Ok(Resolved::Internal(ModuleId::from_dotted("pkg.x").unwrap()))
        );
    }

    #[test]
    fn absolute_import_falls_back_to_external() {
        let known = known(&["widget"]);
        let current = ModuleId::from_dotted("widget").unwrap();
        let resolved =
            resolve_import_path(0, &["impl".to_string(), "_widget".to_string()], &current, false, &known);
        assert_eq!(
            resolved,
            Ok(Resolved::External(
                ModuleId::from_dotted("impl._widget").unwrap()
            ))
        );
    }

    #[test]
    fn level_beyond_depth_errors() {
        let known = known(&["top"]);
        let current = ModuleId::from_dotted("top").unwrap();
        let err = resolve_import_path(3, &["x".to_string()], &current, false, &known);
        assert!(matches!(err, Err(ResolveError::LevelTooDeep { .. })));
    }

    #[test]
    fn deferred_and_conditional_edge_kinds() {
        let files = vec![
            synth(
                "a",
                "import b\n\nif True:\n    import c\n\ndef f():\n    import d\n",
            ),
            synth("b", ""),
            synth("c", ""),
            synth("d", ""),
        ];
        let graph = parse_and_build(files);
        let kinds: Vec<(String, ImportKind)> = graph
            .edges
            .iter()
            .map(|e| (e.to.dotted(), e.kind))
            .collect();
        assert_eq!(
            kinds,
            vec![
                ("b".to_string(), ImportKind::ModuleLevel),
                ("c".to_string(), ImportKind::Conditional),
                ("d".to_string(), ImportKind::Deferred),
            ]
        );
    }

    #[test]
    fn two_cycle_detected_and_broken_by_deferral() {
        let eager = vec![synth("a", "import b\n"), synth("b", "import a\n")];
        let graph = parse_and_build(eager);
        assert_eq!(
            find_cycles(&graph, false),
            vec![vec![
                ModuleId::from_dotted("a").unwrap(),
                ModuleId::from_dotted("b").unwrap()
            ]]
        );

        let deferred = vec![
            synth("a", "import b\n"),
            synth("b", "def get():\n    import a\n    return a\n"),
        ];
        let graph = parse_and_build(deferred);
        assert!(find_cycles(&graph, false).is_empty());
        assert_eq!(find_cycles(&graph, true).len(), 1);
    }

    #[test]
    fn self_import_is_a_self_loop_cycle() {
        let graph = parse_and_build(vec![synth("loopy", "import loopy\n")]);
        assert_eq!(
            find_cycles(&graph, false),
            vec![vec![ModuleId::from_dotted("loopy").unwrap()]]
        );
    }

    #[test]
    fn from_import_of_submodule_adds_submodule_edge() {
        let files = vec![
            synth("pkg", ""),
            synth("client", "from pkg import sub\n"),
            synth("pkg.sub", ""),
        ];
        let graph = parse_and_build(files);
        let targets: BTreeSet<String> = graph.edges.iter().map(|e| e.to.dotted()).collect();
        assert!(targets.contains("pkg"));
        assert!(targets.contains("pkg.sub"));
    }

    #[test]
    fn star_import_records_star_names() {
        let files = vec![synth("wrapper", "from _socket import *\n"), synth("_socket", "")];
        let graph = parse_and_build(files);
        assert!(matches!(graph.edges[0].names, EdgeNames::Star));
    }
}
