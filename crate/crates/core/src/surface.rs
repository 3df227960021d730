//! Public API surface extraction and cross-version diffing.
//!
//! A surface maps each non-private module to its exported symbols with their
//! origins, covering re-exports over private modules and lazy `__getattr__`
//! namespaces. Diffing two surfaces separates internal reorganizations
//! (origin moves) from breaking removals.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use serde_json::json;
use thiserror::Error;

use crate::ast::{NodeKind, SyntaxNode};
use crate::diagnostics::{codes, Diagnostic, Severity};
use crate::graph::{resolve_import_path, ModuleGraph};
use crate::source::{ModuleId, Span};
use crate::visibility::{classify_name, exported_names, ExportProvenance, VisibilityClass};

pub const SURFACE_SCHEMA_VERSION: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Binding {
    DirectDef,
    Reexport,
    Lazy,
}

impl Binding {
    pub fn as_str(self) -> &'static str {
        match self {
            Binding::DirectDef => "direct_def",
            Binding::Reexport => "reexport",
            Binding::Lazy => "lazy",
        }
    }

    fn parse(text: &str) -> Option<Binding> {
        match text {
            "direct_def" => Some(Binding::DirectDef),
            "reexport" => Some(Binding::Reexport),
            "lazy" => Some(Binding::Lazy),
            _ => None,
        }
    }
}

/// One exported symbol of a module.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolEntry {
    pub public_name: String,
    pub exposing_module: ModuleId,
    pub origin_module: ModuleId,
    /// Origin does not resolve inside the analyzed root.
    pub origin_external: bool,
    /// Name within the origin module; empty when the binding is the module
    /// object itself.
    pub origin_name: String,
    pub binding: Binding,
    pub curated: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ApiSurface {
    pub modules: BTreeMap<ModuleId, Vec<SymbolEntry>>,
}

/// One branch of a recognized lazy `__getattr__` namespace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LazyEntry {
    pub public_name: String,
    /// Relative level of the branch's from-import.
    pub level: u32,
    pub path: Vec<String>,
    pub source_name: String,
    pub span: Span,
}

/// Recognizes the module-level lazy namespace idiom: a `__getattr__(name)`
/// whose body is a series of `if name == "X": from <mod> import Y; return Y`
/// blocks ending in a `raise AttributeError(...)`. Any deviation yields
/// `None`.
pub fn detect_lazy_namespace(module: &SyntaxNode) -> Option<Vec<LazyEntry>> {
    let getattr = module.children.iter().find(|stmt| {
        stmt.kind == NodeKind::FunctionDef && stmt.ident() == Some("__getattr__")
    })?;
    let params = getattr.params();
    if params.len() != 1 {
        return None;
    }
    let param = params[0].param_attr()?;
    if param.star != 0 || param.has_default {
        return None;
    }
    let param_name = param.name.clone();

    let body = getattr.func_body();
    let mut stmts: &[&SyntaxNode] = &body;
    if let Some(first) = stmts.first() {
        if first.kind == NodeKind::Docstring {
            stmts = &stmts[1..];
        }
    }
    let (last, branches) = stmts.split_last()?;
    if !is_attribute_error_raise(last) {
        return None;
    }
    let mut entries = Vec::new();
    for branch in branches {
        entries.push(lazy_branch(branch, &param_name)?);
    }
    Some(entries)
}

fn lazy_branch(stmt: &SyntaxNode, param: &str) -> Option<LazyEntry> {
    if stmt.kind != NodeKind::If || !stmt.if_orelse().is_empty() {
        return None;
    }
    let test = stmt.if_test()?;
    if test.kind != NodeKind::Compare {
        return None;
    }
    let (ops, lhs, rhs) = match (&test.attr, test.children.as_slice()) {
        (crate::ast::NodeAttr::Ops(ops), [lhs, rhs]) => (ops, lhs, rhs),
        _ => return None,
    };
    if ops.as_slice() != ["=="] || lhs.kind != NodeKind::NameRef || lhs.ident() != Some(param) {
        return None;
    }
    if rhs.kind != NodeKind::StringLit {
        return None;
    }
    let public_name = rhs.string_value()?.to_string();

    let body = stmt.if_body();
    if body.len() != 2 {
        return None;
    }
    let import = &body[0];
    if import.kind != NodeKind::ImportFrom {
        return None;
    }
    let decl = import.import_decl()?;
    if decl.star || decl.names.len() != 1 || decl.names[0].alias.is_some() {
        return None;
    }
    let source_name = decl.names[0].path.last()?.clone();
    let ret = &body[1];
    if ret.kind != NodeKind::Return {
        return None;
    }
    let value = ret.children.first()?;
    if value.kind != NodeKind::NameRef || value.ident() != Some(source_name.as_str()) {
        return None;
    }
    Some(LazyEntry {
        public_name,
        level: decl.level,
        path: decl.module.clone(),
        source_name,
        span: stmt.span,
    })
}

fn is_attribute_error_raise(stmt: &SyntaxNode) -> bool {
    if stmt.kind != NodeKind::Raise {
        return false;
    }
    match stmt.children.first() {
        Some(exc) => match exc.kind {
            NodeKind::NameRef => exc.ident() == Some("AttributeError"),
            NodeKind::Call => exc
                .call_callee()
                .map(|c| c.kind == NodeKind::NameRef && c.ident() == Some("AttributeError"))
                .unwrap_or(false),
            _ => false,
        },
        None => false,
    }
}

/// Computes the public surface of every non-private module in the graph.
pub fn extract_surface(graph: &ModuleGraph) -> (ApiSurface, Vec<Diagnostic>) {
    let known: BTreeSet<ModuleId> = graph.modules.keys().cloned().collect();
    let mut surface = ApiSurface::default();
    let mut diagnostics = Vec::new();
    for (module_id, parsed) in &graph.modules {
        if module_id.is_private() {
            continue;
        }
        let entries = module_surface(module_id, parsed, graph, &known, &mut diagnostics);
        surface.modules.insert(module_id.clone(), entries);
    }
    (surface, diagnostics)
}

struct BindingInfo {
    name: String,
    origin_module: ModuleId,
    origin_external: bool,
    origin_name: String,
    binding: Binding,
}

fn module_surface(
    module_id: &ModuleId,
    parsed: &crate::parser::ParsedModule,
    graph: &ModuleGraph,
    known: &BTreeSet<ModuleId>,
    diagnostics: &mut Vec<Diagnostic>,
) -> Vec<SymbolEntry> {
    let tree = &parsed.tree;
    let is_package = parsed.file.is_package();
    let exported = exported_names(tree);
    if exported.provenance == ExportProvenance::Undecidable {
        diagnostics.push(Diagnostic::new(
            codes::DYNAMIC_ALL,
            Severity::Info,
            module_id.clone(),
            tree.span,
            "`__all__` cannot be decided statically; falling back to the implicit public set",
        ));
    }

    let mut bindings: Vec<BindingInfo> = Vec::new();
    collect_bindings(
        module_id,
        is_package,
        tree,
        known,
        graph,
        &mut bindings,
        diagnostics,
    );

    let lazy = detect_lazy_namespace(tree);
    if lazy.is_none()
        && tree
            .children
            .iter()
            .any(|s| s.kind == NodeKind::FunctionDef && s.ident() == Some("__getattr__"))
    {
        diagnostics.push(Diagnostic::new(
            codes::OPAQUE_LAZY_NAMESPACE,
            Severity::Info,
            module_id.clone(),
            tree.span,
            "module-level `__getattr__` does not match the recognized lazy-namespace shape",
        ));
    }
    let mut lazy_entries: Vec<(String, SymbolEntry)> = Vec::new();
    for entry in lazy.into_iter().flatten() {
        match resolve_import_path(entry.level, &entry.path, module_id, is_package, known) {
            Ok(resolved) => {
                lazy_entries.push((
                    entry.public_name.clone(),
                    SymbolEntry {
                        public_name: entry.public_name.clone(),
                        exposing_module: module_id.clone(),
                        origin_module: resolved.module().clone(),
                        origin_external: resolved.is_external(),
                        origin_name: entry.source_name.clone(),
                        binding: Binding::Lazy,
                        curated: false,
                    },
                ));
            }
            Err(err) => {
                diagnostics.push(Diagnostic::new(
                    codes::UNRESOLVED_ORIGIN,
                    Severity::Warning,
                    module_id.clone(),
                    entry.span,
                    format!("lazy entry `{}`: {err}", entry.public_name),
                ));
            }
        }
    }
    // A name that is both bound at module level and lazily mapped resolves to
    // the module attribute at runtime; the lazy branch is dead.
    let mut lazy_map: BTreeMap<String, SymbolEntry> = BTreeMap::new();
    for (name, entry) in lazy_entries {
        if bindings.iter().any(|b| b.name == name) {
            diagnostics.push(Diagnostic::new(
                codes::LAZY_DIRECT_CONFLICT,
                Severity::Warning,
                module_id.clone(),
                tree.span,
                format!("`{name}` is bound at module level and lazily mapped; the binding wins"),
            ));
            continue;
        }
        lazy_map.entry(name).or_insert(entry);
    }

    let curated = exported.provenance == ExportProvenance::Curated;
    let mut entries: Vec<SymbolEntry> = Vec::new();
    let mut emitted: BTreeSet<String> = BTreeSet::new();
    if curated {
        for name in &exported.names {
            if emitted.contains(name) {
                continue;
            }
            if let Some(binding) = bindings.iter().find(|b| &b.name == name) {
                entries.push(entry_from_binding(module_id, binding, true));
                emitted.insert(name.clone());
            } else if let Some(mut lazy_entry) = lazy_map.remove(name) {
                lazy_entry.curated = true;
                entries.push(lazy_entry);
                emitted.insert(name.clone());
            }
            // Curated names with no binding at all are export drift; the
            // linter reports them.
        }
    } else {
        for binding in &bindings {
            if classify_name(&binding.name) != VisibilityClass::Public {
                continue;
            }
            if emitted.insert(binding.name.clone()) {
                entries.push(entry_from_binding(module_id, binding, false));
            }
        }
    }
    // Lazy names outside the curated list are still reachable attributes.
    for (name, entry) in lazy_map {
        if !emitted.contains(&name) {
            entries.push(entry);
        }
    }
    entries
}

fn entry_from_binding(module_id: &ModuleId, info: &BindingInfo, curated: bool) -> SymbolEntry {
    SymbolEntry {
        public_name: info.name.clone(),
        exposing_module: module_id.clone(),
        origin_module: info.origin_module.clone(),
        origin_external: info.origin_external,
        origin_name: info.origin_name.clone(),
        binding: info.binding,
        curated,
    }
}

fn collect_bindings(
    module_id: &ModuleId,
    is_package: bool,
    tree: &SyntaxNode,
    known: &BTreeSet<ModuleId>,
    graph: &ModuleGraph,
    out: &mut Vec<BindingInfo>,
    diagnostics: &mut Vec<Diagnostic>,
) {
    for stmt in &tree.children {
        match stmt.kind {
            NodeKind::ClassDef | NodeKind::FunctionDef => {
                if let Some(name) = stmt.ident() {
                    out.push(BindingInfo {
                        name: name.to_string(),
                        origin_module: module_id.clone(),
                        origin_external: false,
                        origin_name: name.to_string(),
                        binding: Binding::DirectDef,
                    });
                }
            }
            NodeKind::Assign => {
                for target in stmt.assign_targets() {
                    collect_assign_target(module_id, target, out);
                }
            }
            NodeKind::Import => {
                if let Some(decl) = stmt.import_decl() {
                    for alias in &decl.names {
                        let (bound, path): (String, &[String]) = match &alias.alias {
                            Some(a) => (a.clone(), &alias.path),
                            None => (alias.path[0].clone(), &alias.path[..1]),
                        };
                        match resolve_import_path(0, path, module_id, is_package, known) {
                            Ok(resolved) => out.push(BindingInfo {
                                name: bound,
                                origin_module: resolved.module().clone(),
                                origin_external: resolved.is_external(),
                                origin_name: String::new(),
                                binding: Binding::Reexport,
                            }),
                            Err(_) => {}
                        }
                    }
                }
            }
            NodeKind::ImportFrom => {
                let Some(decl) = stmt.import_decl() else {
                    continue;
                };
                let resolved = match resolve_import_path(
                    decl.level,
                    &decl.module,
                    module_id,
                    is_package,
                    known,
                ) {
                    Ok(resolved) => resolved,
                    Err(_) => continue, // already diagnosed during graph build
                };
                let origin = resolved.module().clone();
                let external = resolved.is_external();
                if decl.star {
                    if external {
                        continue;
                    }
                    // Expand an internal star import through the origin's own
                    // export set.
                    if let Some(parsed) = graph.modules.get(&origin) {
                        for name in crate::visibility::star_import_set(&parsed.tree) {
                            out.push(BindingInfo {
                                name: name.clone(),
                                origin_module: origin.clone(),
                                origin_external: false,
                                origin_name: name,
                                binding: Binding::Reexport,
                            });
                        }
                    }
                    continue;
                }
                for alias in &decl.names {
                    let Some(orig_name) = alias.path.last() else {
                        continue;
                    };
                    let bound = alias.alias.clone().unwrap_or_else(|| orig_name.clone());
                    if external && origin.is_private() {
                        diagnostics.push(Diagnostic::new(
                            codes::UNRESOLVED_ORIGIN,
                            Severity::Warning,
                            module_id.clone(),
                            stmt.span,
                            format!(
                                "re-export `{bound}` originates in `{origin}`, which is outside the analyzed root"
                            ),
                        ));
                    }
                    out.push(BindingInfo {
                        name: bound,
                        origin_module: origin.clone(),
                        origin_external: external,
                        origin_name: orig_name.clone(),
                        binding: Binding::Reexport,
                    });
                }
            }
            _ => {}
        }
    }
}

fn collect_assign_target(module_id: &ModuleId, target: &SyntaxNode, out: &mut Vec<BindingInfo>) {
    match target.kind {
        NodeKind::NameRef => {
            if let Some(name) = target.ident() {
                out.push(BindingInfo {
                    name: name.to_string(),
                    origin_module: module_id.clone(),
                    origin_external: false,
                    origin_name: name.to_string(),
                    binding: Binding::DirectDef,
                });
            }
        }
        NodeKind::TupleLit | NodeKind::ListLit => {
            for child in &target.children {
                collect_assign_target(module_id, child, out);
            }
        }
        _ => {}
    }
}

/// Assigns every (module, name) pair of both surfaces to exactly one bucket.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SurfaceDiff {
    pub added: Vec<DiffEntry>,
    pub removed: Vec<DiffEntry>,
    pub origin_moved: Vec<DiffEntry>,
    pub unchanged: Vec<DiffEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DiffEntry {
    pub module: String,
    pub name: String,
    pub detail: String,
}

impl SurfaceDiff {
    pub fn is_breaking(&self) -> bool {
        !self.removed.is_empty()
    }

    pub fn len(&self) -> usize {
        self.added.len() + self.removed.len() + self.origin_moved.len() + self.unchanged.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Matches entries by (exposing module, public name): origin changes are
/// non-breaking moves, names present on one side only are added/removed.
pub fn diff_surfaces(old: &ApiSurface, new: &ApiSurface) -> SurfaceDiff {
    type Key = (String, String);
    let index = |s: &ApiSurface| -> BTreeMap<Key, (String, String)> {
        let mut map = BTreeMap::new();
        for (module, entries) in &s.modules {
            for entry in entries {
                map.insert(
                    (module.dotted(), entry.public_name.clone()),
                    (entry.origin_module.dotted(), entry.origin_name.clone()),
                );
            }
        }
        map
    };
    let old_index = index(old);
    let new_index = index(new);
    let mut diff = SurfaceDiff::default();
    for ((module, name), (old_origin, old_origin_name)) in &old_index {
        match new_index.get(&(module.clone(), name.clone())) {
            None => diff.removed.push(DiffEntry {
                module: module.clone(),
                name: name.clone(),
                detail: format!("was {}", origin_display(old_origin, old_origin_name)),
            }),
            Some((new_origin, new_origin_name)) => {
                if new_origin == old_origin && new_origin_name == old_origin_name {
                    diff.unchanged.push(DiffEntry {
                        module: module.clone(),
                        name: name.clone(),
                        detail: origin_display(old_origin, old_origin_name),
                    });
                } else {
                    diff.origin_moved.push(DiffEntry {
                        module: module.clone(),
                        name: name.clone(),
                        detail: format!(
                            "{} -> {}",
                            origin_display(old_origin, old_origin_name),
                            origin_display(new_origin, new_origin_name)
                        ),
                    });
                }
            }
        }
    }
    for (module, name) in new_index.keys() {
        if !old_index.contains_key(&(module.clone(), name.clone())) {
            let (origin, origin_name) = &new_index[&(module.clone(), name.clone())];
            diff.added.push(DiffEntry {
                module: module.clone(),
                name: name.clone(),
                detail: origin_display(origin, origin_name),
            });
        }
    }
    diff.added.sort();
    diff.removed.sort();
    diff.origin_moved.sort();
    diff.unchanged.sort();
    diff
}

fn origin_display(module: &str, name: &str) -> String {
    if name.is_empty() {
        module.to_string()
    } else {
        format!("{module}:{name}")
    }
}

/// Serializes a surface into the versioned JSON document (sorted keys,
/// arrays in stable order).
pub fn surface_to_json(surface: &ApiSurface) -> serde_json::Value {
    let mut modules = serde_json::Map::new();
    for (module, entries) in &surface.modules {
        let list: Vec<serde_json::Value> = entries
            .iter()
            .map(|e| {
                json!({
                    "name": e.public_name,
                    "origin": e.origin_module.dotted(),
                    "origin_name": e.origin_name,
                    "binding": e.binding.as_str(),
                    "curated": e.curated,
                })
            })
            .collect();
        modules.insert(module.dotted(), serde_json::Value::Array(list));
    }
    json!({
        "version": SURFACE_SCHEMA_VERSION,
        "modules": modules,
    })
}

#[derive(Debug, Error)]
pub enum SurfaceLoadError {
    #[error("invalid surface document: {0}")]
    Invalid(String),
    #[error("unsupported surface schema version {0}")]
    Version(u64),
}

/// Parses a surface document produced by [`surface_to_json`].
pub fn surface_from_json(value: &serde_json::Value) -> Result<ApiSurface, SurfaceLoadError> {
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| SurfaceLoadError::Invalid("missing version".into()))?;
    if version != SURFACE_SCHEMA_VERSION {
        return Err(SurfaceLoadError::Version(version));
    }
    let modules = value
        .get("modules")
        .and_then(|m| m.as_object())
        .ok_or_else(|| SurfaceLoadError::Invalid("missing modules map".into()))?;
    let mut surface = ApiSurface::default();
    for (module, entries) in modules {
        let module_id = ModuleId::from_dotted(module)
            .ok_or_else(|| SurfaceLoadError::Invalid(format!("bad module id `{module}`")))?;
        let list = entries
            .as_array()
            .ok_or_else(|| SurfaceLoadError::Invalid("entries must be an array".into()))?;
        let mut symbols = Vec::new();
        for item in list {
            let get = |key: &str| -> Result<&str, SurfaceLoadError> {
                item.get(key)
                    .and_then(|v| v.as_str())
                    .ok_or_else(|| SurfaceLoadError::Invalid(format!("missing `{key}`")))
            };
            let origin = get("origin")?;
            let origin_module = ModuleId::from_dotted(origin)
                .ok_or_else(|| SurfaceLoadError::Invalid(format!("bad origin `{origin}`")))?;
            let binding = Binding::parse(get("binding")?)
                .ok_or_else(|| SurfaceLoadError::Invalid("bad binding".into()))?;
            symbols.push(SymbolEntry {
                public_name: get("name")?.to_string(),
                exposing_module: module_id.clone(),
                origin_module,
                origin_external: false,
                origin_name: get("origin_name")?.to_string(),
                binding,
                curated: item
                    .get("curated")
                    .and_then(|v| v.as_bool())
                    .unwrap_or(false),
            });
        }
        surface.modules.insert(module_id, symbols);
    }
    Ok(surface)
}
