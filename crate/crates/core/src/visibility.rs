//! Identifier visibility conventions: underscore classification, name
//! mangling, `__all__` curation, and wildcard-import export sets.

use std::collections::BTreeSet;
use std::fmt;

use crate::ast::{NodeKind, SyntaxNode};
use crate::source::{is_identifier, ModuleId};

/// Four-way classification of an identifier. Total over identifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VisibilityClass {
    Public,
    Internal,
    Mangled,
    Dunder,
}

/// Classifies an identifier by its underscore shape.
///
/// Leading and trailing double underscores mark a dunder, which is exempt
/// from mangling; a double-underscore prefix alone marks a mangled name; a
/// single leading underscore marks an internal name.
pub fn classify_name(name: &str) -> VisibilityClass {
    let leading = name.starts_with("__");
    let trailing = name.ends_with("__");
    if leading && trailing {
        VisibilityClass::Dunder
    } else if leading {
        VisibilityClass::Mangled
    } else if name.starts_with('_') {
        VisibilityClass::Internal
    } else {
        VisibilityClass::Public
    }
}

/// Rewrites a class-private attribute the way the interpreter does:
/// `__attr` inside `class MyClass` becomes `_MyClass__attr`.
///
/// Attributes that are not classified [`VisibilityClass::Mangled`] are
/// returned unchanged, as are attributes of classes whose name consists
/// only of underscores (the interpreter skips mangling for those).
pub fn mangle(class_name: &str, attr: &str) -> String {
    if classify_name(attr) != VisibilityClass::Mangled {
        return attr.to_string();
    }
    let stripped = class_name.trim_start_matches('_');
    if stripped.is_empty() {
        return attr.to_string();
    }
    format!("_{stripped}{attr}")
}

/// Inverse of [`mangle`] where one exists.
///
/// Splits `_<Class>__<attr>` at the first double underscore after the class
/// part. Names without that shape return `None`. Class names containing a
/// double underscore mangle ambiguously; this returns the canonical split
/// (shortest class part), which re-mangles to the same key.
pub fn demangle(name: &str) -> Option<(String, String)> {
    let rest = name.strip_prefix('_')?;
    if rest.starts_with('_') {
        return None;
    }
    let idx = rest.find("__")?;
    let (class_part, attr) = rest.split_at(idx);
    if class_part.is_empty() || classify_name(attr) != VisibilityClass::Mangled {
        return None;
    }
    Some((class_part.to_string(), attr.to_string()))
}

/// A fully qualified name: module, optional enclosing class, identifier.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QualifiedName {
    pub module: ModuleId,
    pub enclosing_class: Option<String>,
    pub name: String,
}

impl QualifiedName {
    pub fn module_level(module: ModuleId, name: impl Into<String>) -> Self {
        QualifiedName {
            module,
            enclosing_class: None,
            name: name.into(),
        }
    }

    pub fn member(module: ModuleId, class: impl Into<String>, name: impl Into<String>) -> Self {
        QualifiedName {
            module,
            enclosing_class: Some(class.into()),
            name: name.into(),
        }
    }
}

impl fmt::Display for QualifiedName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.enclosing_class {
            Some(class) => write!(f, "{}.{}.{}", self.module, class, self.name),
            None => write!(f, "{}.{}", self.module, self.name),
        }
    }
}

/// How a module's export set was determined.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportProvenance {
    /// `__all__` bound to a literal list of strings.
    Curated,
    /// No curation; public top-level bindings in source order.
    Implicit,
    /// `__all__` exists but cannot be decided statically; the implicit set
    /// is used as a fallback.
    Undecidable,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExportedNames {
    pub names: Vec<String>,
    pub provenance: ExportProvenance,
}

impl ExportedNames {
    pub fn contains(&self, name: &str) -> bool {
        self.names.iter().any(|n| n == name)
    }
}

/// One way `__all__` is touched at the top level of a module.
enum AllEvent {
    Literal(Vec<String>),
    Dynamic,
    Mutation,
    /// Literal lists bound in each arm of a top-level `if`, plus whether an
    /// `else` arm exists at the end of the chain.
    Conditional(Vec<Option<Vec<String>>>, bool),
}

/// Computes a module's export set and its provenance.
///
/// A single top-level `__all__` bound to a list (or tuple) of string
/// literals yields the curated set in source order. Mutation, non-literal
/// binding, and disagreeing conditional branches make the curation
/// undecidable; the implicit public set is returned instead.
pub fn exported_names(module: &SyntaxNode) -> ExportedNames {
    let events = collect_all_events(module);
    let implicit = || {
        top_level_bound_names(module)
            .into_iter()
            .filter(|n| classify_name(n) == VisibilityClass::Public)
            .collect::<Vec<_>>()
    };

    if events.is_empty() {
        return ExportedNames {
            names: implicit(),
            provenance: ExportProvenance::Implicit,
        };
    }

    let mut lists: Vec<Vec<String>> = Vec::new();
    for event in &events {
        match event {
            AllEvent::Dynamic | AllEvent::Mutation => {
                return ExportedNames {
                    names: implicit(),
                    provenance: ExportProvenance::Undecidable,
                };
            }
            AllEvent::Literal(list) => lists.push(list.clone()),
            AllEvent::Conditional(arms, has_else) => {
                if !*has_else || arms.iter().any(|a| a.is_none()) {
                    return ExportedNames {
                        names: implicit(),
                        provenance: ExportProvenance::Undecidable,
                    };
                }
                for arm in arms.iter().flatten() {
                    lists.push(arm.clone());
                }
            }
        }
    }

    let first = lists[0].clone();
    if lists.iter().any(|l| *l != first) {
        return ExportedNames {
            names: implicit(),
            provenance: ExportProvenance::Undecidable,
        };
    }

    let mut seen = BTreeSet::new();
    let names = first
        .into_iter()
        .filter(|n| seen.insert(n.clone()))
        .collect();
    ExportedNames {
        names,
        provenance: ExportProvenance::Curated,
    }
}

/// The set of names `from module import *` would bind: the curated `__all__`
/// when present, otherwise all public top-level bindings.
pub fn star_import_set(module: &SyntaxNode) -> BTreeSet<String> {
    exported_names(module).names.into_iter().collect()
}

fn collect_all_events(module: &SyntaxNode) -> Vec<AllEvent> {
    let mut events = Vec::new();
    for stmt in &module.children {
        match stmt.kind {
            NodeKind::Assign => {
                if assign_binds(stmt, "__all__") {
                    match stmt.assign_value().and_then(string_list_literal) {
                        Some(list) => events.push(AllEvent::Literal(list)),
                        None => events.push(AllEvent::Dynamic),
                    }
                }
            }
            NodeKind::AugAssign => {
                if stmt
                    .children
                    .first()
                    .is_some_and(|t| t.kind == NodeKind::NameRef && t.ident() == Some("__all__"))
                {
                    events.push(AllEvent::Mutation);
                }
            }
            NodeKind::ExprStmt => {
                // A method call on __all__ (append, extend, ...) mutates it.
                if let Some(expr) = stmt.children.first() {
                    if expr.kind == NodeKind::Call
                        && expr.children.first().is_some_and(|callee| {
                            callee.kind == NodeKind::Attribute
                                && callee.children.first().is_some_and(|r| {
                                    r.kind == NodeKind::NameRef && r.ident() == Some("__all__")
                                })
                        })
                    {
                        events.push(AllEvent::Mutation);
                    }
                }
            }
            NodeKind::If => {
                if let Some(event) = conditional_all_event(stmt) {
                    events.push(event);
                }
            }
            _ => {}
        }
    }
    events
}

fn conditional_all_event(if_stmt: &SyntaxNode) -> Option<AllEvent> {
    let mut arms: Vec<Option<Vec<String>>> = Vec::new();
    let mut has_else = false;
    let mut current = if_stmt;
    loop {
        let body = current.if_body();
        arms.push(arm_all_literal(body));
        let orelse = current.if_orelse();
        if orelse.is_empty() {
            break;
        }
        if orelse.len() == 1 && orelse[0].kind == NodeKind::If {
            current = &orelse[0];
            continue;
        }
        has_else = true;
        arms.push(arm_all_literal(orelse));
        break;
    }
    if arms.iter().all(|a| a.is_none()) {
        return None;
    }
    Some(AllEvent::Conditional(arms, has_else))
}

fn arm_all_literal(stmts: &[SyntaxNode]) -> Option<Vec<String>> {
    for stmt in stmts {
        if stmt.kind == NodeKind::Assign && assign_binds(stmt, "__all__") {
            return stmt.assign_value().and_then(string_list_literal);
        }
    }
    None
}

fn assign_binds(assign: &SyntaxNode, name: &str) -> bool {
    assign
        .assign_targets()
        .iter()
        .any(|t| t.kind == NodeKind::NameRef && t.ident() == Some(name))
}

fn string_list_literal(node: &SyntaxNode) -> Option<Vec<String>> {
    if !matches!(node.kind, NodeKind::ListLit | NodeKind::TupleLit) {
        return None;
    }
    node.children
        .iter()
        .map(|c| {
            if c.kind == NodeKind::StringLit {
                c.string_value().map(str::to_string)
            } else {
                None
            }
        })
        .collect()
}

/// Names bound at a module's top level, in source order, deduplicated.
/// Bindings inside top-level `if` arms are included.
pub fn top_level_bound_names(module: &SyntaxNode) -> Vec<String> {
    let mut names = Vec::new();
    let mut seen = BTreeSet::new();
    collect_bound_names(&module.children, &mut names, &mut seen);
    names
}

fn collect_bound_names(stmts: &[SyntaxNode], names: &mut Vec<String>, seen: &mut BTreeSet<String>) {
    let push = |name: &str, names: &mut Vec<String>, seen: &mut BTreeSet<String>| {
        if is_identifier(name) && seen.insert(name.to_string()) {
            names.push(name.to_string());
        }
    };
    for stmt in stmts {
        match stmt.kind {
            NodeKind::Assign => {
                for target in stmt.assign_targets() {
                    collect_target_names(target, names, seen);
                }
            }
            NodeKind::AugAssign => {
                if let Some(t) = stmt.children.first() {
                    if t.kind == NodeKind::NameRef {
                        if let Some(n) = t.ident() {
                            push(n, names, seen);
                        }
                    }
                }
            }
            NodeKind::ClassDef | NodeKind::FunctionDef => {
                if let Some(n) = stmt.ident() {
                    push(n, names, seen);
                }
            }
            NodeKind::Import | NodeKind::ImportFrom => {
                if let Some(decl) = stmt.import_decl() {
                    for bound in decl.bound_names() {
                        push(&bound, names, seen);
                    }
                }
            }
            NodeKind::If => {
                collect_bound_names(stmt.if_body(), names, seen);
                collect_bound_names(stmt.if_orelse(), names, seen);
            }
            _ => {}
        }
    }
}

fn collect_target_names(
    target: &SyntaxNode,
    names: &mut Vec<String>,
    seen: &mut BTreeSet<String>,
) {
    match target.kind {
        NodeKind::NameRef => {
            if let Some(n) = target.ident() {
                if is_identifier(n) && seen.insert(n.to_string()) {
                    names.push(n.to_string());
                }
            }
        }
        NodeKind::TupleLit | NodeKind::ListLit => {
            for child in &target.children {
                collect_target_names(child, names, seen);
            }
        }
        // Attribute and subscript targets do not bind module names.
        _ => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_matches_underscore_shapes() {
        assert_eq!(classify_name("_helper"), VisibilityClass::Internal);
        assert_eq!(classify_name("status"), VisibilityClass::Public);
        assert_eq!(classify_name("__internal"), VisibilityClass::Mangled);
        assert_eq!(classify_name("__init__"), VisibilityClass::Dunder);
        assert_eq!(classify_name("_"), VisibilityClass::Internal);
        assert_eq!(classify_name("__"), VisibilityClass::Dunder);
        assert_eq!(classify_name("___"), VisibilityClass::Dunder);
        assert_eq!(classify_name("__x_"), VisibilityClass::Mangled);
        assert_eq!(classify_name("x__"), VisibilityClass::Public);
    }

    #[test]
    fn classification_is_idempotent_over_repeat_calls() {
        for name in ["_a", "b", "__c", "__d__"] {
            assert_eq!(classify_name(name), classify_name(name));
        }
    }

    #[test]
    fn mangle_follows_interpreter_rules() {
        assert_eq!(mangle("MyClass", "__internal"), "_MyClass__internal");
        assert_eq!(mangle("Widget", "start"), "start");
        assert_eq!(mangle("_Private", "__x"), "_Private__x");
        assert_eq!(mangle("___", "__x"), "__x");
        assert_eq!(mangle("C", "__x__"), "__x__");
        assert_eq!(mangle("D_", "__x"), "_D___x");
    }

    #[test]
    fn demangle_inverts_canonical_mangles() {
        assert_eq!(
            demangle("_MyClass__internal"),
            Some(("MyClass".to_string(), "__internal".to_string()))
        );
        assert_eq!(demangle("_helper"), None);
        assert_eq!(demangle("__x"), None);
        assert_eq!(demangle("_C__x__"), None);
        assert_eq!(demangle("plain"), None);
    }
}
