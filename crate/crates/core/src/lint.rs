//! Boundary lint rules.
//!
//! R001 external impl access; R002 private-module import; R003 mangled-name
//! reliance; R004 export drift; R005 module-level import cycle; R006 eager
//! heavy import; R007 business logic in the interface layer. Parse and
//! infrastructure findings (P-codes) flow through the same diagnostic
//! stream.

use std::collections::{BTreeMap, BTreeSet};

use serde_json::json;
use thiserror::Error;

use crate::ast::{NodeKind, SyntaxNode};
use crate::detect::{ImplPattern, PackageReports, DEFAULT_IMPL_PATTERN};
use crate::diagnostics::{codes, sort_diagnostics, Diagnostic, Severity};
use crate::graph::{find_cycles, ImportKind, ModuleGraph};
use crate::source::{ModuleId, Span};
use crate::surface::ApiSurface;
use crate::visibility::{
    classify_name, demangle, exported_names, top_level_bound_names, ExportProvenance,
    VisibilityClass,
};

pub const LINT_SCHEMA_VERSION: u64 = 1;
pub const DEFAULT_DELEGATION_THRESHOLD: f64 = 0.5;
pub const DEFAULT_SUPPRESS_MARKER: &str = "pimpl:";

#[derive(Clone, Debug)]
pub struct LintConfig {
    /// Enabled rule codes (R-codes only; P-codes always flow through).
    pub rules: BTreeSet<String>,
    pub impl_attr_pattern: String,
    /// Dotted prefixes treated as heavy dependencies.
    pub heavy_modules: Vec<String>,
    /// R007 fires below this delegation coverage.
    pub delegation_threshold: f64,
    /// When non-empty, R001/R002/R006 only guard boundaries of modules under
    /// these dotted prefixes.
    pub public_roots: Vec<String>,
    /// Extend R001 to all internal attributes, not just the impl pattern.
    pub strict: bool,
    pub suppress_marker: String,
}

impl Default for LintConfig {
    fn default() -> Self {
        LintConfig {
            rules: codes::ALL_RULES.iter().map(|c| c.to_string()).collect(),
            impl_attr_pattern: DEFAULT_IMPL_PATTERN.to_string(),
            heavy_modules: Vec::new(),
            delegation_threshold: DEFAULT_DELEGATION_THRESHOLD,
            public_roots: Vec::new(),
            strict: false,
            suppress_marker: DEFAULT_SUPPRESS_MARKER.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown rule id `{0}`")]
    UnknownRule(String),
    #[error("delegation_threshold {0} is outside [0, 1]")]
    ThresholdRange(f64),
    #[error("{0}")]
    Pattern(#[from] crate::detect::PatternError),
    #[error("config field `{field}` has the wrong type")]
    FieldType { field: &'static str },
}

impl LintConfig {
    /// Parses the JSON config file format. Unknown rule ids and out-of-range
    /// thresholds are rejected.
    pub fn from_json(text: &str) -> Result<LintConfig, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let mut config = LintConfig::default();
        if let Some(rules) = value.get("rules") {
            let list = rules
                .as_array()
                .ok_or(ConfigError::FieldType { field: "rules" })?;
            let mut enabled = BTreeSet::new();
            for rule in list {
                let code = rule
                    .as_str()
                    .ok_or(ConfigError::FieldType { field: "rules" })?;
                if !codes::ALL_RULES.contains(&code) {
                    return Err(ConfigError::UnknownRule(code.to_string()));
                }
                enabled.insert(code.to_string());
            }
            config.rules = enabled;
        }
        if let Some(pattern) = value.get("impl_attr_pattern") {
            config.impl_attr_pattern = pattern
                .as_str()
                .ok_or(ConfigError::FieldType {
                    field: "impl_attr_pattern",
                })?
                .to_string();
            ImplPattern::new(&config.impl_attr_pattern)?;
        }
        if let Some(heavy) = value.get("heavy_modules") {
            let list = heavy.as_array().ok_or(ConfigError::FieldType {
                field: "heavy_modules",
            })?;
            config.heavy_modules = list
                .iter()
                .map(|v| {
                    v.as_str().map(str::to_string).ok_or(ConfigError::FieldType {
                        field: "heavy_modules",
                    })
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(threshold) = value.get("delegation_threshold") {
            let t = threshold.as_f64().ok_or(ConfigError::FieldType {
                field: "delegation_threshold",
            })?;
            if !(0.0..=1.0).contains(&t) {
                return Err(ConfigError::ThresholdRange(t));
            }
            config.delegation_threshold = t;
        }
        if let Some(roots) = value.get("public_roots") {
            let list = roots.as_array().ok_or(ConfigError::FieldType {
                field: "public_roots",
            })?;
            config.public_roots = list
                .iter()
                .map(|v| {
                    v.as_str().map(str::to_string).ok_or(ConfigError::FieldType {
                        field: "public_roots",
                    })
                })
                .collect::<Result<_, _>>()?;
        }
        if let Some(strict) = value.get("strict") {
            config.strict = strict.as_bool().ok_or(ConfigError::FieldType {
                field: "strict",
            })?;
        }
        if let Some(marker) = value.get("suppress_marker") {
            config.suppress_marker = marker
                .as_str()
                .ok_or(ConfigError::FieldType {
                    field: "suppress_marker",
                })?
                .to_string();
        }
        Ok(config)
    }

    pub fn enabled(&self, code: &str) -> bool {
        self.rules.contains(code)
    }

    fn in_public_roots(&self, module: &ModuleId) -> bool {
        if self.public_roots.is_empty() {
            return true;
        }
        let dotted = module.dotted();
        self.public_roots
            .iter()
            .any(|root| dotted == *root || dotted.starts_with(&format!("{root}.")))
    }
}

/// Runs every enabled rule and merges upstream parse/graph/surface
/// diagnostics, sorted by (module, position, code).
pub fn lint_package(
    graph: &ModuleGraph,
    surface: &ApiSurface,
    reports: &PackageReports,
    upstream: &[Diagnostic],
    config: &LintConfig,
) -> Vec<Diagnostic> {
    let pattern = ImplPattern::new(&config.impl_attr_pattern).unwrap_or_default();
    let mut diagnostics: Vec<Diagnostic> = upstream.to_vec();
    let _ = surface; // surfaces inform R004 indirectly via exported_names

    if config.enabled(codes::EXTERNAL_IMPL_ACCESS) {
        rule_external_impl_access(graph, &pattern, config, &mut diagnostics);
    }
    if config.enabled(codes::PRIVATE_MODULE_IMPORT) {
        rule_private_module_import(graph, reports, config, &mut diagnostics);
    }
    if config.enabled(codes::MANGLED_NAME_RELIANCE) {
        rule_mangled_reliance(graph, &mut diagnostics);
    }
    if config.enabled(codes::EXPORT_DRIFT) {
        rule_export_drift(graph, &mut diagnostics);
    }
    if config.enabled(codes::IMPORT_CYCLE) {
        rule_import_cycle(graph, &mut diagnostics);
    }
    if config.enabled(codes::EAGER_HEAVY_IMPORT) {
        rule_eager_heavy_import(graph, config, &mut diagnostics);
    }
    if config.enabled(codes::LOGIC_IN_INTERFACE) {
        rule_logic_in_interface(reports, config, &mut diagnostics);
    }

    sort_diagnostics(&mut diagnostics);
    diagnostics
}

/// R001: impl-pattern attribute access on a receiver other than `self`/`cls`
/// outside the module that defines that attribute.
fn rule_external_impl_access(
    graph: &ModuleGraph,
    pattern: &ImplPattern,
    config: &LintConfig,
    out: &mut Vec<Diagnostic>,
) {
    // Modules that assign a matching attribute on `self` in some class are
    // the pattern's home; accesses there stay quiet.
    let mut defining: BTreeMap<String, BTreeSet<ModuleId>> = BTreeMap::new();
    for (module_id, parsed) in &graph.modules {
        parsed.tree.walk(&mut |node| {
            if node.kind == NodeKind::Assign {
                for target in node.assign_targets() {
                    if let Some(attr) = self_attr_name(target) {
                        defining
                            .entry(attr.to_string())
                            .or_default()
                            .insert(module_id.clone());
                    }
                }
            }
        });
    }
    for (module_id, parsed) in &graph.modules {
        parsed.tree.walk(&mut |node| {
            if node.kind != NodeKind::Attribute {
                return;
            }
            let Some(attr) = node.ident() else { return };
            let matches_pattern = pattern.matches(attr);
            let strict_hit =
                config.strict && classify_name(attr) == VisibilityClass::Internal;
            if !matches_pattern && !strict_hit {
                return;
            }
            let receiver = node.children.first();
            if receiver
                .map(|r| {
                    r.kind == NodeKind::NameRef
                        && matches!(r.ident(), Some("self") | Some("cls"))
                })
                .unwrap_or(false)
            {
                return;
            }
            if defining
                .get(attr)
                .map(|modules| modules.contains(module_id))
                .unwrap_or(false)
            {
                return;
            }
            if !matches_pattern && !config.in_public_roots(module_id) {
                return;
            }
            out.push(
                Diagnostic::new(
                    codes::EXTERNAL_IMPL_ACCESS,
                    Severity::Error,
                    module_id.clone(),
                    node.span,
                    format!("access to internal implementation attribute `{attr}` outside its defining module"),
                )
                .with_suggestion(
                    "call the wrapper's public methods instead of reaching through the implementation handle",
                ),
            );
        });
    }
}

fn self_attr_name(expr: &SyntaxNode) -> Option<&str> {
    if expr.kind != NodeKind::Attribute {
        return None;
    }
    let receiver = expr.children.first()?;
    if receiver.kind == NodeKind::NameRef && receiver.ident() == Some("self") {
        expr.ident()
    } else {
        None
    }
}

/// R002: import of a private module from outside its parent package
/// subtree. Wrapper modules that rebind names from the private module are
/// the pattern's interface layer and stay quiet.
fn rule_private_module_import(
    graph: &ModuleGraph,
    reports: &PackageReports,
    config: &LintConfig,
    out: &mut Vec<Diagnostic>,
) {
    for edge in &graph.edges {
        if edge.external || !edge.to.is_private() {
            continue;
        }
        if !config.in_public_roots(&edge.to) {
            continue;
        }
        let allowed_prefix = edge.to.private_boundary_prefix();
        if allowed_prefix.is_empty() || edge.from.is_within(allowed_prefix) {
            continue;
        }
        let is_wrapper = reports
            .module_report(&edge.from)
            .map(|r| r.backing_modules.contains(&edge.to))
            .unwrap_or(false);
        if is_wrapper {
            continue;
        }
        out.push(
            Diagnostic::new(
                codes::PRIVATE_MODULE_IMPORT,
                Severity::Error,
                edge.from.clone(),
                edge.span,
                format!(
                    "`{}` imports private module `{}` from outside `{}`",
                    edge.from,
                    edge.to,
                    allowed_prefix.join(".")
                ),
            )
            .with_suggestion(format!(
                "import through `{}`'s public namespace instead",
                allowed_prefix.join(".")
            )),
        );
    }
}

/// R003: a name or attribute spelled in the mangled `_Class__attr` shape
/// where the class is not the lexically enclosing one.
fn rule_mangled_reliance(graph: &ModuleGraph, out: &mut Vec<Diagnostic>) {
    for (module_id, parsed) in &graph.modules {
        let mut class_stack: Vec<String> = Vec::new();
        walk_with_classes(&parsed.tree, &mut class_stack, &mut |node, classes| {
            let name = match node.kind {
                NodeKind::NameRef | NodeKind::Attribute => match node.ident() {
                    Some(n) => n,
                    None => return,
                },
                _ => return,
            };
            let Some((class, _attr)) = demangle(name) else {
                return;
            };
            if classes.iter().any(|c| c.trim_start_matches('_') == class) {
                return;
            }
            out.push(
                Diagnostic::new(
                    codes::MANGLED_NAME_RELIANCE,
                    Severity::Error,
                    module_id.clone(),
                    node.span,
                    format!("reliance on mangled name `{name}` outside class `{class}`"),
                )
                .with_suggestion("expose the attribute through a public accessor instead"),
            );
        });
    }
}

fn walk_with_classes<'a>(
    node: &'a SyntaxNode,
    stack: &mut Vec<String>,
    visit: &mut impl FnMut(&'a SyntaxNode, &[String]),
) {
    visit(node, stack);
    let pushed = if node.kind == NodeKind::ClassDef {
        if let Some(name) = node.ident() {
            stack.push(name.to_string());
            true
        } else {
            false
        }
    } else {
        false
    };
    for child in &node.children {
        walk_with_classes(child, stack, visit);
    }
    if pushed {
        stack.pop();
    }
}

/// R004: curated `__all__` disagreeing with the module's top-level
/// definitions, in either direction. Info severity.
fn rule_export_drift(graph: &ModuleGraph, out: &mut Vec<Diagnostic>) {
    for (module_id, parsed) in &graph.modules {
        let exported = exported_names(&parsed.tree);
        if exported.provenance != ExportProvenance::Curated {
            continue;
        }
        let bound: BTreeSet<String> = top_level_bound_names(&parsed.tree).into_iter().collect();
        let lazy: BTreeSet<String> = crate::surface::detect_lazy_namespace(&parsed.tree)
            .map(|entries| entries.into_iter().map(|e| e.public_name).collect())
            .unwrap_or_default();
        // Spans of the __all__ string elements, for precise reporting.
        let all_spans = curated_name_spans(&parsed.tree);
        for name in &exported.names {
            if !bound.contains(name) && !lazy.contains(name) {
                let span = all_spans.get(name).copied().unwrap_or(parsed.tree.span);
                out.push(Diagnostic::new(
                    codes::EXPORT_DRIFT,
                    Severity::Info,
                    module_id.clone(),
                    span,
                    format!("`__all__` lists `{name}`, which has no top-level binding"),
                ));
            }
        }
        for stmt in &parsed.tree.children {
            if !matches!(stmt.kind, NodeKind::ClassDef | NodeKind::FunctionDef | NodeKind::Assign)
            {
                continue;
            }
            let mut names: Vec<String> = Vec::new();
            match stmt.kind {
                NodeKind::ClassDef | NodeKind::FunctionDef => {
                    if let Some(n) = stmt.ident() {
                        names.push(n.to_string());
                    }
                }
                NodeKind::Assign => {
                    for target in stmt.assign_targets() {
                        if target.kind == NodeKind::NameRef {
                            if let Some(n) = target.ident() {
                                names.push(n.to_string());
                            }
                        }
                    }
                }
                _ => {}
            }
            for name in names {
                if classify_name(&name) == VisibilityClass::Public
                    && !exported.contains(&name)
                {
                    out.push(Diagnostic::new(
                        codes::EXPORT_DRIFT,
                        Severity::Info,
                        module_id.clone(),
                        stmt.span,
                        format!("public definition `{name}` is absent from the curated `__all__`"),
                    ));
                }
            }
        }
    }
}

fn curated_name_spans(tree: &SyntaxNode) -> BTreeMap<String, Span> {
    let mut spans = BTreeMap::new();
    for stmt in &tree.children {
        if stmt.kind != NodeKind::Assign {
            continue;
        }
        let binds_all = stmt
            .assign_targets()
            .iter()
            .any(|t| t.kind == NodeKind::NameRef && t.ident() == Some("__all__"));
        if !binds_all {
            continue;
        }
        if let Some(value) = stmt.assign_value() {
            if matches!(value.kind, NodeKind::ListLit | NodeKind::TupleLit) {
                for child in &value.children {
                    if child.kind == NodeKind::StringLit {
                        if let Some(name) = child.string_value() {
                            spans.entry(name.to_string()).or_insert(child.span);
                        }
                    }
                }
            }
        }
    }
    spans
}

/// R005: one diagnostic per module-level cycle, anchored at the smallest
/// member's participating import.
fn rule_import_cycle(graph: &ModuleGraph, out: &mut Vec<Diagnostic>) {
    for cycle in find_cycles(graph, false) {
        let members: BTreeSet<&ModuleId> = cycle.iter().collect();
        let head = &cycle[0];
        let span = graph
            .edges_from(head)
            .find(|e| {
                !e.external && e.kind == ImportKind::ModuleLevel && members.contains(&e.to)
            })
            .map(|e| e.span)
            .unwrap_or_default();
        let path = cycle
            .iter()
            .map(ModuleId::dotted)
            .collect::<Vec<_>>()
            .join(" -> ");
        out.push(
            Diagnostic::new(
                codes::IMPORT_CYCLE,
                Severity::Warning,
                head.clone(),
                span,
                format!("module-level import cycle: {path}"),
            )
            .with_suggestion(
                "defer one import into the initializer of the interface class or a factory function",
            ),
        );
    }
}

/// R006: module-level import of a configured heavy dependency from a
/// non-private module.
fn rule_eager_heavy_import(graph: &ModuleGraph, config: &LintConfig, out: &mut Vec<Diagnostic>) {
    if config.heavy_modules.is_empty() {
        return;
    }
    for edge in &graph.edges {
        if edge.kind != ImportKind::ModuleLevel || edge.from.is_private() {
            continue;
        }
        if !config.in_public_roots(&edge.from) {
            continue;
        }
        let target = edge.to.dotted();
        let heavy = config
            .heavy_modules
            .iter()
            .any(|prefix| target == *prefix || target.starts_with(&format!("{prefix}.")));
        if !heavy {
            continue;
        }
        out.push(
            Diagnostic::new(
                codes::EAGER_HEAVY_IMPORT,
                Severity::Warning,
                edge.from.clone(),
                edge.span,
                format!("eager module-level import of heavy dependency `{target}`"),
            )
            .with_suggestion(
                "move the import into the implementation layer or defer it behind a lazy namespace",
            ),
        );
    }
}

/// R007: a wrapper class whose delegation coverage falls below the
/// configured threshold keeps too much logic in the interface.
fn rule_logic_in_interface(
    reports: &PackageReports,
    config: &LintConfig,
    out: &mut Vec<Diagnostic>,
) {
    for (module_id, report) in &reports.classes {
        if report.coverage >= config.delegation_threshold {
            continue;
        }
        let delegated = report.delegating_methods.len() + report.guarded_delegations.len();
        let public = delegated + report.non_delegating_public.len();
        out.push(
            Diagnostic::new(
                codes::LOGIC_IN_INTERFACE,
                Severity::Warning,
                module_id.clone(),
                report.class_span,
                format!(
                    "interface class `{}` delegates {delegated} of {public} public methods (coverage {:.2} below threshold {:.2})",
                    report.class_name, report.coverage, config.delegation_threshold
                ),
            )
            .with_suggestion(format!(
                "move non-delegating method bodies behind `self.{}`",
                report.impl_attr
            )),
        );
    }
}

/// Outcome of a suppression pass.
#[derive(Clone, Debug, Default)]
pub struct SuppressionSummary {
    /// Per-code counts of findings removed by markers.
    pub suppressed: BTreeMap<String, usize>,
}

impl SuppressionSummary {
    pub fn total(&self) -> usize {
        self.suppressed.values().sum()
    }
}

/// Removes findings whose start line carries a trailing
/// `# pimpl: allow(CODE[,CODE]*)` comment. Malformed markers under the
/// configured prefix become info diagnostics.
pub fn apply_suppressions(
    diagnostics: Vec<Diagnostic>,
    graph: &ModuleGraph,
    config: &LintConfig,
) -> (Vec<Diagnostic>, SuppressionSummary) {
    // (module, line) -> allowed codes
    let mut allowed: BTreeMap<(String, u32), BTreeSet<String>> = BTreeMap::new();
    let mut marker_diags: Vec<Diagnostic> = Vec::new();
    for (module_id, parsed) in &graph.modules {
        for comment in &parsed.comments {
            if comment.own_line {
                continue;
            }
            let body = comment.text.trim_start_matches('#').trim();
            let Some(rest) = body.strip_prefix(&config.suppress_marker) else {
                continue;
            };
            match parse_allow_list(rest) {
                Some(codes) => {
                    allowed
                        .entry((module_id.dotted(), comment.span.start_line))
                        .or_default()
                        .extend(codes);
                }
                None => {
                    marker_diags.push(Diagnostic::new(
                        codes::MALFORMED_SUPPRESSION,
                        Severity::Info,
                        module_id.clone(),
                        comment.span,
                        format!("malformed suppression marker `{body}`"),
                    ));
                }
            }
        }
    }

    let mut summary = SuppressionSummary::default();
    let mut kept: Vec<Diagnostic> = Vec::new();
    for diag in diagnostics {
        let key = (diag.module.dotted(), diag.span.start_line);
        let suppressed = allowed
            .get(&key)
            .map(|codes| codes.contains(diag.code))
            .unwrap_or(false);
        if suppressed {
            *summary.suppressed.entry(diag.code.to_string()).or_insert(0) += 1;
        } else {
            kept.push(diag);
        }
    }
    kept.extend(marker_diags);
    sort_diagnostics(&mut kept);
    (kept, summary)
}

fn parse_allow_list(rest: &str) -> Option<Vec<String>> {
    let rest = rest.trim();
    let inner = rest.strip_prefix("allow(")?.strip_suffix(')')?;
    let mut codes_list = Vec::new();
    for part in inner.split(',') {
        let code = part.trim();
        if code.is_empty() || !code.chars().all(|c| c.is_ascii_alphanumeric()) {
            return None;
        }
        codes_list.push(code.to_string());
    }
    if codes_list.is_empty() {
        return None;
    }
    Some(codes_list)
}

/// Versioned machine-readable lint report.
pub fn lint_to_json(diagnostics: &[Diagnostic], summary: &SuppressionSummary) -> serde_json::Value {
    let items: Vec<serde_json::Value> = diagnostics
        .iter()
        .map(|d| {
            json!({
                "code": d.code,
                "severity": d.severity.as_str(),
                "module": d.module.dotted(),
                "line": d.span.start_line,
                "col": d.span.start_col,
                "end_line": d.span.end_line,
                "end_col": d.span.end_col,
                "message": d.message,
                "suggestion": d.suggestion,
                "fingerprint": d.fingerprint(),
            })
        })
        .collect();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for diag in diagnostics {
        *counts.entry(diag.code.to_string()).or_insert(0) += 1;
    }
    json!({
        "version": LINT_SCHEMA_VERSION,
        "diagnostics": items,
        "summary": {
            "counts": counts,
            "suppressed": summary.suppressed,
        },
    })
}

/// One text line per finding: `module:line:col: severity CODE message`.
pub fn lint_to_text(diagnostics: &[Diagnostic]) -> String {
    let mut out = String::new();
    for d in diagnostics {
        out.push_str(&format!(
            "{}:{}:{}: {} {} {}\n",
            d.module.dotted(),
            d.span.start_line,
            d.span.start_col,
            d.severity,
            d.code,
            d.message
        ));
        if let Some(suggestion) = &d.suggestion {
            out.push_str(&format!("    suggestion: {suggestion}\n"));
        }
    }
    out
}
