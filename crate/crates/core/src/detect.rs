//! Detectors for the three wrapper realizations: class-level `_impl`
//! delegation, wrapper modules over private backing modules, and runtime
//! factory/backend binding.

use std::collections::BTreeMap;
use std::collections::BTreeSet;

use regex::Regex;
use thiserror::Error;

use crate::ast::{ArgTag, NodeKind, ParamAttr, SyntaxNode};
use crate::graph::{EdgeNames, ImportKind, ModuleGraph};
use crate::source::{ModuleId, Span};
use crate::visibility::{classify_name, VisibilityClass};

/// Full-match pattern over attribute names that hold the implementation
/// object. The default accepts the two conventional spellings.
#[derive(Clone, Debug)]
pub struct ImplPattern {
    regex: Regex,
    source: String,
}

pub const DEFAULT_IMPL_PATTERN: &str = "_impl|_pimpl";

#[derive(Debug, Error)]
#[error("invalid impl attribute pattern `{pattern}`: {source}")]
pub struct PatternError {
    pattern: String,
    source: regex::Error,
}

impl ImplPattern {
    pub fn new(pattern: &str) -> Result<Self, PatternError> {
        let regex = Regex::new(&format!("^(?:{pattern})$")).map_err(|source| PatternError {
            pattern: pattern.to_string(),
            source,
        })?;
        Ok(ImplPattern {
            regex,
            source: pattern.to_string(),
        })
    }

    pub fn matches(&self, attr: &str) -> bool {
        self.regex.is_match(attr)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl Default for ImplPattern {
    fn default() -> Self {
        ImplPattern::new(DEFAULT_IMPL_PATTERN).expect("default pattern compiles")
    }
}

/// Delegation analysis of one wrapper class.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassPimplReport {
    pub class_name: String,
    pub class_span: Span,
    pub impl_attr: String,
    /// Statement spans where the impl attribute is assigned on `self`.
    pub construction_sites: Vec<Span>,
    /// (public method, target method on the impl object).
    pub delegating_methods: Vec<(String, String)>,
    /// Delegations preceded by a nil-check guard.
    pub guarded_delegations: Vec<(String, String)>,
    pub non_delegating_public: Vec<String>,
    /// (delegating + guarded) / public methods; 1.0 when the class exposes
    /// no public methods beyond construction.
    pub coverage: f64,
}

/// Produces a report when some `self.<attr>` matching the pattern is
/// assigned in `__init__` or another method.
pub fn detect_class_pimpl(cls: &SyntaxNode, pattern: &ImplPattern) -> Option<ClassPimplReport> {
    if cls.kind != NodeKind::ClassDef {
        return None;
    }
    let methods: Vec<&SyntaxNode> = cls
        .class_body()
        .into_iter()
        .filter(|s| s.kind == NodeKind::FunctionDef)
        .collect();

    // Find impl-attribute assignments on `self` across all methods.
    let mut impl_attr: Option<String> = None;
    let mut sites_by_attr: BTreeMap<String, Vec<Span>> = BTreeMap::new();
    let mut order: Vec<String> = Vec::new();
    for method in &methods {
        for stmt in method.func_body() {
            collect_self_impl_assigns(stmt, pattern, &mut sites_by_attr, &mut order);
        }
    }
    if let Some(first) = order.first() {
        impl_attr = Some(first.clone());
    }
    let impl_attr = impl_attr?;
    let construction_sites = sites_by_attr.remove(&impl_attr).unwrap_or_default();

    let mut delegating = Vec::new();
    let mut guarded = Vec::new();
    let mut non_delegating = Vec::new();
    for method in &methods {
        let name = method.ident()?.to_string();
        if name == "__init__" {
            continue;
        }
        let class = classify_name(&name);
        let delegation = classify_delegation(method, &impl_attr);
        match class {
            VisibilityClass::Internal | VisibilityClass::Mangled => continue,
            VisibilityClass::Dunder => match delegation {
                // Dunders count only when they forward; otherwise they stay
                // out of the denominator entirely.
                Some(Delegation::Plain(target)) => delegating.push((name, target)),
                Some(Delegation::Guarded(target)) => guarded.push((name, target)),
                None => continue,
            },
            VisibilityClass::Public => match delegation {
                Some(Delegation::Plain(target)) => delegating.push((name, target)),
                Some(Delegation::Guarded(target)) => guarded.push((name, target)),
                None => non_delegating.push(name),
            },
        }
    }
    let numerator = delegating.len() + guarded.len();
    let denominator = numerator + non_delegating.len();
    let coverage = if denominator == 0 {
        1.0
    } else {
        numerator as f64 / denominator as f64
    };
    Some(ClassPimplReport {
        class_name: cls.ident()?.to_string(),
        class_span: cls.span,
        impl_attr,
        construction_sites,
        delegating_methods: delegating,
        guarded_delegations: guarded,
        non_delegating_public: non_delegating,
        coverage,
    })
}

fn collect_self_impl_assigns(
    stmt: &SyntaxNode,
    pattern: &ImplPattern,
    sites: &mut BTreeMap<String, Vec<Span>>,
    order: &mut Vec<String>,
) {
    match stmt.kind {
        NodeKind::Assign => {
            for target in stmt.assign_targets() {
                if let Some(attr) = self_attribute(target) {
                    if pattern.matches(attr) {
                        if !order.iter().any(|a| a == attr) {
                            order.push(attr.to_string());
                        }
                        sites.entry(attr.to_string()).or_default().push(stmt.span);
                    }
                }
            }
        }
        NodeKind::If => {
            for child in stmt.if_body().iter().chain(stmt.if_orelse()) {
                collect_self_impl_assigns(child, pattern, sites, order);
            }
        }
        _ => {}
    }
}

/// `self.<attr>` receiver shape; returns the attribute name.
fn self_attribute(expr: &SyntaxNode) -> Option<&str> {
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

enum Delegation {
    Plain(String),
    Guarded(String),
}

/// A method delegates when its body (after the docstring) is exactly one
/// return/expression statement calling `self.<impl>.<m>` with the method's
/// own parameters forwarded in order. A guarded delegation allows one
/// preceding `if` whose body is a single raise testing the impl attribute,
/// and tolerates the delegation itself being wrapped in one more such test.
fn classify_delegation(method: &SyntaxNode, impl_attr: &str) -> Option<Delegation> {
    let params: Vec<&ParamAttr> = method
        .params()
        .into_iter()
        .filter_map(|p| p.param_attr())
        .collect();
    let mut body: Vec<&SyntaxNode> = method.func_body();
    if body.first().map(|s| s.kind) == Some(NodeKind::Docstring) {
        body.remove(0);
    }
    match body.as_slice() {
        [single] => {
            let target = delegation_target(single, &params, impl_attr)?;
            Some(Delegation::Plain(target))
        }
        [guard, rest] => {
            if !is_nil_guard(guard, impl_attr) {
                return None;
            }
            if let Some(target) = delegation_target(rest, &params, impl_attr) {
                return Some(Delegation::Guarded(target));
            }
            // The redundant second guard: `if self._impl:` wrapping the call.
            if rest.kind == NodeKind::If
                && rest.if_orelse().is_empty()
                && test_mentions_impl(rest.if_test()?, impl_attr)
                && rest.if_body().len() == 1
            {
                let target = delegation_target(&rest.if_body()[0], &params, impl_attr)?;
                return Some(Delegation::Guarded(target));
            }
            None
        }
        _ => None,
    }
}

fn is_nil_guard(stmt: &SyntaxNode, impl_attr: &str) -> bool {
    stmt.kind == NodeKind::If
        && stmt.if_orelse().is_empty()
        && stmt.if_body().len() == 1
        && stmt.if_body()[0].kind == NodeKind::Raise
        && stmt
            .if_test()
            .map(|t| test_mentions_impl(t, impl_attr))
            .unwrap_or(false)
}

fn test_mentions_impl(test: &SyntaxNode, impl_attr: &str) -> bool {
    let mut found = false;
    test.walk(&mut |node| {
        if self_attribute(node) == Some(impl_attr) {
            found = true;
        }
    });
    found
}

/// Matches `return self.<impl>.<m>(args...)` or the bare expression form,
/// with arguments forwarding the parameters in order (names exact, `self`
/// excluded, star parameters forwarded with stars).
fn delegation_target(
    stmt: &SyntaxNode,
    params: &[&ParamAttr],
    impl_attr: &str,
) -> Option<String> {
    let expr = match stmt.kind {
        NodeKind::Return => stmt.children.first()?,
        NodeKind::ExprStmt => stmt.children.first()?,
        _ => return None,
    };
    if expr.kind != NodeKind::Call {
        return None;
    }
    let callee = expr.call_callee()?;
    if callee.kind != NodeKind::Attribute {
        return None;
    }
    let target_method = callee.ident()?.to_string();
    let receiver = callee.children.first()?;
    if self_attribute(receiver) != Some(impl_attr) {
        return None;
    }

    // Pair forwarded arguments with the declared parameters.
    let forwarded: Vec<&ParamAttr> = params
        .iter()
        .filter(|p| !(p.name == "self" || p.name == "cls"))
        .filter(|p| !(p.star == 1 && p.name.is_empty())) // bare `*` separator
        .copied()
        .collect();
    let args = expr.call_args();
    if args.len() != forwarded.len() {
        return None;
    }
    for (param, (tag, value)) in forwarded.iter().zip(args.iter()) {
        let name_matches =
            value.kind == NodeKind::NameRef && value.ident() == Some(param.name.as_str());
        let ok = match (param.star, tag) {
            (0, ArgTag::Positional) => name_matches,
            (0, ArgTag::Keyword(kw)) => kw == &param.name && name_matches,
            (1, ArgTag::Star) => name_matches,
            (2, ArgTag::DoubleStar) => name_matches,
            _ => false,
        };
        if !ok {
            return None;
        }
    }
    Some(target_method)
}

/// A runtime backend selector: one parameter compared against string
/// literals in an if/elif chain, each branch constructing a distinct
/// implementation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FactoryReport {
    pub selector: String,
    pub selector_span: Span,
    pub parameter: String,
    /// (compared literal, constructed implementation name) in branch order.
    pub branches: Vec<(String, String)>,
    pub fallback_raises: bool,
}

/// Scans a module or class for factory-shaped functions. Functions need at
/// least two branches with distinct literals to be reported.
pub fn detect_factory(scope: &SyntaxNode) -> Vec<FactoryReport> {
    let mut functions: Vec<&SyntaxNode> = Vec::new();
    match scope.kind {
        NodeKind::Module => {
            for stmt in &scope.children {
                if stmt.kind == NodeKind::FunctionDef {
                    functions.push(stmt);
                } else if stmt.kind == NodeKind::ClassDef {
                    functions.extend(
                        stmt.class_body()
                            .into_iter()
                            .filter(|s| s.kind == NodeKind::FunctionDef),
                    );
                }
            }
        }
        NodeKind::ClassDef => {
            functions.extend(
                scope
                    .class_body()
                    .into_iter()
                    .filter(|s| s.kind == NodeKind::FunctionDef),
            );
        }
        _ => {}
    }
    functions
        .into_iter()
        .filter_map(factory_report)
        .collect()
}

fn factory_report(func: &SyntaxNode) -> Option<FactoryReport> {
    let params: BTreeSet<&str> = func
        .params()
        .into_iter()
        .filter_map(|p| p.param_attr())
        .filter(|p| p.name != "self" && p.name != "cls" && !p.name.is_empty())
        .map(|p| p.name.as_str())
        .collect();
    if params.is_empty() {
        return None;
    }
    for stmt in func.func_body() {
        if stmt.kind != NodeKind::If {
            continue;
        }
        if let Some(report) = factory_chain(func, stmt, &params) {
            return Some(report);
        }
    }
    None
}

/// Selector expression: the parameter itself or a no-argument method call on
/// it (`backend.lower()`); returns (parameter, method) as the chain shape.
fn selector_shape<'a>(
    expr: &'a SyntaxNode,
    params: &BTreeSet<&str>,
) -> Option<(&'a str, Option<&'a str>)> {
    match expr.kind {
        NodeKind::NameRef => {
            let name = expr.ident()?;
            params.contains(name).then_some((name, None))
        }
        NodeKind::Call => {
            if !expr.call_args().is_empty() {
                return None;
            }
            let callee = expr.call_callee()?;
            if callee.kind != NodeKind::Attribute {
                return None;
            }
            let receiver = callee.children.first()?;
            if receiver.kind != NodeKind::NameRef {
                return None;
            }
            let name = receiver.ident()?;
            params
                .contains(name)
                .then_some((name, Some(callee.ident()?)))
        }
        _ => None,
    }
}

fn factory_chain(
    func: &SyntaxNode,
    head: &SyntaxNode,
    params: &BTreeSet<&str>,
) -> Option<FactoryReport> {
    let mut branches: Vec<(String, String)> = Vec::new();
    let mut shape: Option<(String, Option<String>)> = None;
    let mut fallback_raises = false;
    let mut current = head;
    loop {
        let test = current.if_test()?;
        if test.kind != NodeKind::Compare {
            return None;
        }
        let (ops, lhs, rhs) = match (&current.if_test()?.attr, test.children.as_slice()) {
            (crate::ast::NodeAttr::Ops(ops), [lhs, rhs]) => (ops, lhs, rhs),
            _ => return None,
        };
        if ops.as_slice() != ["=="] || rhs.kind != NodeKind::StringLit {
            return None;
        }
        let (param, method) = selector_shape(lhs, params)?;
        let this_shape = (param.to_string(), method.map(str::to_string));
        match &shape {
            None => shape = Some(this_shape),
            Some(existing) if *existing == this_shape => {}
            Some(_) => return None, // branches must compare the same selector
        }
        let literal = rhs.string_value()?.to_string();
        let body = current.if_body();
        if body.len() != 1 {
            return None;
        }
        let ctor = branch_constructor(&body[0])?;
        branches.push((literal, ctor));

        let orelse = current.if_orelse();
        if orelse.is_empty() {
            break;
        }
        if orelse.len() == 1 && orelse[0].kind == NodeKind::If {
            current = &orelse[0];
            continue;
        }
        if orelse.len() == 1 && orelse[0].kind == NodeKind::Raise {
            fallback_raises = true;
            break;
        }
        return None;
    }
    if branches.len() < 2 {
        return None;
    }
    let mut literals = BTreeSet::new();
    if !branches.iter().all(|(lit, _)| literals.insert(lit.clone())) {
        return None;
    }
    let (param, _) = shape?;
    Some(FactoryReport {
        selector: func.ident()?.to_string(),
        selector_span: func.span,
        parameter: param,
        branches,
        fallback_raises,
    })
}

/// A branch must assign or return a constructor call; the constructed name
/// is the final identifier of the callee.
fn branch_constructor(stmt: &SyntaxNode) -> Option<String> {
    let expr = match stmt.kind {
        NodeKind::Assign => stmt.assign_value()?,
        NodeKind::Return => stmt.children.first()?,
        _ => return None,
    };
    if expr.kind != NodeKind::Call {
        return None;
    }
    let callee = expr.call_callee()?;
    match callee.kind {
        NodeKind::NameRef | NodeKind::Attribute => callee.ident().map(str::to_string),
        _ => None,
    }
}

/// A public module importing private modules and rebinding names from them.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModulePimplReport {
    pub public_module: ModuleId,
    pub backing_modules: Vec<ModuleId>,
    /// (public binding, origin name); `*` for star re-exports.
    pub rebound_names: Vec<(String, String)>,
}

/// Reports a module-level wrapper: a non-private module with at least one
/// module-level import of a private module and at least one name rebound
/// from one.
pub fn detect_module_pimpl(module_id: &ModuleId, graph: &ModuleGraph) -> Option<ModulePimplReport> {
    if module_id.is_private() {
        return None;
    }
    let parsed = graph.modules.get(module_id)?;

    let mut backing: BTreeSet<ModuleId> = BTreeSet::new();
    // Local alias -> module path, for plain imports of private modules.
    let mut module_aliases: BTreeMap<String, ModuleId> = BTreeMap::new();
    let mut rebound: Vec<(String, String)> = Vec::new();

    for edge in graph.edges_from(module_id) {
        if edge.kind != ImportKind::ModuleLevel || !edge.to.is_private() {
            continue;
        }
        backing.insert(edge.to.clone());
        match &edge.names {
            EdgeNames::Module { alias } => {
                let local = alias
                    .clone()
                    .unwrap_or_else(|| edge.to.components()[0].clone());
                if alias.is_some() {
                    module_aliases.insert(local, edge.to.clone());
                }
            }
            EdgeNames::Named(names) => {
                for (name, alias) in names {
                    rebound.push((alias.clone().unwrap_or_else(|| name.clone()), name.clone()));
                }
            }
            EdgeNames::Star => rebound.push(("*".to_string(), "*".to_string())),
        }
    }
    // Plain `import pkg._mod` without alias binds the top package; attribute
    // chains rooted at it can still rebind names. Track dotted roots too.
    let known: BTreeSet<ModuleId> = graph.modules.keys().cloned().collect();
    for stmt in &parsed.tree.children {
        if stmt.kind != NodeKind::Assign {
            continue;
        }
        let Some(value) = stmt.assign_value() else {
            continue;
        };
        let Some(path) = value.dotted_path() else {
            continue;
        };
        if path.len() < 2 {
            continue;
        }
        // Resolve the longest known-module prefix of the chain.
        let Some((origin, rest)) = longest_module_prefix(&path, &module_aliases, &known) else {
            continue;
        };
        if !origin.is_private() || rest.len() != 1 {
            continue;
        }
        backing.insert(origin);
        for target in stmt.assign_targets() {
            if target.kind == NodeKind::NameRef {
                if let Some(name) = target.ident() {
                    rebound.push((name.to_string(), rest[0].clone()));
                }
            }
        }
    }

    if backing.is_empty() || rebound.is_empty() {
        return None;
    }
    Some(ModulePimplReport {
        public_module: module_id.clone(),
        backing_modules: backing.into_iter().collect(),
        rebound_names: rebound,
    })
}

/// Splits an attribute chain into (module, remaining attrs) using alias
/// bindings and known module paths. Returns None when the root is unknown.
fn longest_module_prefix(
    path: &[String],
    aliases: &BTreeMap<String, ModuleId>,
    known: &BTreeSet<ModuleId>,
) -> Option<(ModuleId, Vec<String>)> {
    let (mut module, mut consumed) = if let Some(target) = aliases.get(&path[0]) {
        (target.clone(), 1)
    } else {
        (ModuleId::from_dotted(&path[0])?, 1)
    };
    if aliases.get(&path[0]).is_none() && !known.contains(&module) {
        return None;
    }
    while consumed < path.len() {
        let Some(extended) = module.child(&path[consumed]) else {
            break;
        };
        if known.contains(&extended) {
            module = extended;
            consumed += 1;
        } else {
            break;
        }
    }
    Some((module, path[consumed..].to_vec()))
}

/// Detector results for a whole package.
#[derive(Clone, Debug, Default)]
pub struct PackageReports {
    pub classes: Vec<(ModuleId, ClassPimplReport)>,
    pub factories: Vec<(ModuleId, FactoryReport)>,
    pub modules: Vec<ModulePimplReport>,
}

impl PackageReports {
    /// Class reports for one module.
    pub fn classes_in<'a>(
        &'a self,
        module: &'a ModuleId,
    ) -> impl Iterator<Item = &'a ClassPimplReport> {
        self.classes
            .iter()
            .filter(move |(m, _)| m == module)
            .map(|(_, r)| r)
    }

    pub fn module_report(&self, module: &ModuleId) -> Option<&ModulePimplReport> {
        self.modules.iter().find(|r| &r.public_module == module)
    }
}

/// Runs all detectors over every module of the graph, deterministically.
pub fn detect_package(graph: &ModuleGraph, pattern: &ImplPattern) -> PackageReports {
    let mut reports = PackageReports::default();
    for (module_id, parsed) in &graph.modules {
        for stmt in &parsed.tree.children {
            if stmt.kind == NodeKind::ClassDef {
                if let Some(report) = detect_class_pimpl(stmt, pattern) {
                    reports.classes.push((module_id.clone(), report));
                }
            }
        }
        for factory in detect_factory(&parsed.tree) {
            reports.factories.push((module_id.clone(), factory));
        }
        if let Some(report) = detect_module_pimpl(module_id, graph) {
            reports.modules.push(report);
        }
    }
    reports
}
