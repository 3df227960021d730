//! Span-annotated syntax tree for the analyzed Python subset.
//!
//! Nodes are uniform: a kind, a span, ordered children, and a kind-specific
//! attribute payload. Statements the parser cannot handle become
//! [`NodeKind::Unsupported`] nodes covering exactly one statement.

use serde::Serialize;

use crate::source::Span;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum NodeKind {
    Module,
    Import,
    ImportFrom,
    ClassDef,
    FunctionDef,
    Assign,
    AugAssign,
    Return,
    Raise,
    Pass,
    If,
    ExprStmt,
    Attribute,
    NameRef,
    Call,
    StringLit,
    NumberLit,
    ListLit,
    TupleLit,
    DictLit,
    Compare,
    BoolOp,
    BinOp,
    UnaryOp,
    Subscript,
    Decorator,
    Parameter,
    Docstring,
    Unsupported,
}

impl NodeKind {
    /// Kinds that appear in expression position.
    pub fn is_expression(self) -> bool {
        matches!(
            self,
            NodeKind::Attribute
                | NodeKind::NameRef
                | NodeKind::Call
                | NodeKind::StringLit
                | NodeKind::NumberLit
                | NodeKind::ListLit
                | NodeKind::TupleLit
                | NodeKind::DictLit
                | NodeKind::Compare
                | NodeKind::BoolOp
                | NodeKind::BinOp
                | NodeKind::UnaryOp
                | NodeKind::Subscript
        )
    }
}

/// Parameter metadata: `star` is 0 for plain, 1 for `*args` (or a bare `*`
/// separator with an empty name), 2 for `**kwargs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParamAttr {
    pub name: String,
    pub star: u8,
    pub has_annotation: bool,
    pub has_default: bool,
}

/// Per-argument tag for a call, parallel to `children[1..]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ArgTag {
    Positional,
    Keyword(String),
    Star,
    DoubleStar,
}

/// Assignment shape: `children` holds `n_targets` targets, then an optional
/// annotation, then an optional value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssignAttr {
    pub n_targets: usize,
    pub has_annotation: bool,
    pub has_value: bool,
}

/// `children` holds the test, `n_body` then-statements, and the rest is the
/// else suite (a single `If` child models an `elif`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IfAttr {
    pub n_body: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImportAlias {
    pub path: Vec<String>,
    pub alias: Option<String>,
}

/// Payload for `Import` and `ImportFrom` nodes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ImportDecl {
    pub from_import: bool,
    /// Relative level: number of leading dots in a from-import.
    pub level: u32,
    /// Source module path of a from-import (may be empty for `from . import x`).
    pub module: Vec<String>,
    pub names: Vec<ImportAlias>,
    pub star: bool,
}

impl ImportDecl {
    /// Local names this statement binds.
    pub fn bound_names(&self) -> Vec<String> {
        if self.star {
            return Vec::new();
        }
        self.names
            .iter()
            .filter_map(|alias| {
                if let Some(a) = &alias.alias {
                    Some(a.clone())
                } else if self.from_import {
                    alias.path.last().cloned()
                } else {
                    alias.path.first().cloned()
                }
            })
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum NodeAttr {
    #[default]
    None,
    /// Identifier text: `NameRef`, attribute name, class/function name.
    Ident(String),
    /// Cooked string value: `StringLit` and `Docstring`.
    Str(String),
    /// Number lexeme, kept verbatim.
    Num(String),
    /// Operator tag: `BoolOp`, `BinOp`, `UnaryOp`, `AugAssign`.
    Op(String),
    /// Comparison operator chain.
    Ops(Vec<String>),
    Param(ParamAttr),
    CallArgs(Vec<ArgTag>),
    Assign(AssignAttr),
    If(IfAttr),
    Import(ImportDecl),
    /// Why this statement is `Unsupported`.
    Reason(String),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SyntaxNode {
    pub kind: NodeKind,
    pub span: Span,
    pub children: Vec<SyntaxNode>,
    pub attr: NodeAttr,
}

impl SyntaxNode {
    pub fn new(kind: NodeKind, span: Span) -> Self {
        SyntaxNode {
            kind,
            span,
            children: Vec::new(),
            attr: NodeAttr::None,
        }
    }

    pub fn with_attr(kind: NodeKind, span: Span, attr: NodeAttr) -> Self {
        SyntaxNode {
            kind,
            span,
            children: Vec::new(),
            attr,
        }
    }

    pub fn ident(&self) -> Option<&str> {
        match &self.attr {
            NodeAttr::Ident(name) => Some(name),
            NodeAttr::Param(p) => Some(&p.name),
            _ => None,
        }
    }

    pub fn string_value(&self) -> Option<&str> {
        match &self.attr {
            NodeAttr::Str(value) => Some(value),
            _ => None,
        }
    }

    pub fn op(&self) -> Option<&str> {
        match &self.attr {
            NodeAttr::Op(op) => Some(op),
            _ => None,
        }
    }

    pub fn import_decl(&self) -> Option<&ImportDecl> {
        match &self.attr {
            NodeAttr::Import(decl) => Some(decl),
            _ => None,
        }
    }

    pub fn param_attr(&self) -> Option<&ParamAttr> {
        match &self.attr {
            NodeAttr::Param(p) => Some(p),
            _ => None,
        }
    }

    pub fn unsupported_reason(&self) -> Option<&str> {
        match &self.attr {
            NodeAttr::Reason(r) => Some(r),
            _ => None,
        }
    }

    // ---- function/class structure ----

    pub fn decorators(&self) -> impl Iterator<Item = &SyntaxNode> {
        self.children
            .iter()
            .filter(|c| c.kind == NodeKind::Decorator)
    }

    /// Parameters of a `FunctionDef`.
    pub fn params(&self) -> Vec<&SyntaxNode> {
        self.children
            .iter()
            .filter(|c| c.kind == NodeKind::Parameter)
            .collect()
    }

    /// Body statements of a `FunctionDef` (children that are neither
    /// decorators nor parameters).
    pub fn func_body(&self) -> Vec<&SyntaxNode> {
        self.children
            .iter()
            .filter(|c| !matches!(c.kind, NodeKind::Decorator | NodeKind::Parameter))
            .collect()
    }

    /// Base-class expressions of a `ClassDef`: leading expression children
    /// after any decorators.
    pub fn class_bases(&self) -> Vec<&SyntaxNode> {
        self.children
            .iter()
            .skip_while(|c| c.kind == NodeKind::Decorator)
            .take_while(|c| c.kind.is_expression())
            .collect()
    }

    /// Body statements of a `ClassDef`.
    pub fn class_body(&self) -> Vec<&SyntaxNode> {
        self.children
            .iter()
            .skip_while(|c| c.kind == NodeKind::Decorator)
            .skip_while(|c| c.kind.is_expression())
            .collect()
    }

    // ---- assignment structure ----

    pub fn assign_targets(&self) -> &[SyntaxNode] {
        match &self.attr {
            NodeAttr::Assign(a) => &self.children[..a.n_targets],
            _ => &[],
        }
    }

    pub fn assign_value(&self) -> Option<&SyntaxNode> {
        match &self.attr {
            NodeAttr::Assign(a) if a.has_value => self.children.last(),
            _ => None,
        }
    }

    pub fn assign_annotation(&self) -> Option<&SyntaxNode> {
        match &self.attr {
            NodeAttr::Assign(a) if a.has_annotation => self.children.get(a.n_targets),
            _ => None,
        }
    }

    // ---- if structure ----

    pub fn if_test(&self) -> Option<&SyntaxNode> {
        match &self.attr {
            NodeAttr::If(_) => self.children.first(),
            _ => None,
        }
    }

    pub fn if_body(&self) -> &[SyntaxNode] {
        match &self.attr {
            NodeAttr::If(a) => &self.children[1..1 + a.n_body],
            _ => &[],
        }
    }

    pub fn if_orelse(&self) -> &[SyntaxNode] {
        match &self.attr {
            NodeAttr::If(a) => &self.children[1 + a.n_body..],
            _ => &[],
        }
    }

    // ---- call structure ----

    pub fn call_callee(&self) -> Option<&SyntaxNode> {
        match self.kind {
            NodeKind::Call => self.children.first(),
            _ => None,
        }
    }

    pub fn call_args(&self) -> Vec<(&ArgTag, &SyntaxNode)> {
        match (&self.attr, self.kind) {
            (NodeAttr::CallArgs(tags), NodeKind::Call) => {
                tags.iter().zip(self.children.iter().skip(1)).collect()
            }
            _ => Vec::new(),
        }
    }

    // ---- traversal ----

    /// Depth-first pre-order walk over this node and all descendants.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a SyntaxNode)) {
        visit(self);
        for child in &self.children {
            child.walk(visit);
        }
    }

    pub fn count_kind(&self, kind: NodeKind) -> usize {
        let mut count = 0;
        self.walk(&mut |n| {
            if n.kind == kind {
                count += 1;
            }
        });
        count
    }

    /// Dotted text of a `NameRef`/`Attribute` chain, e.g. `impl._widget.X`.
    pub fn dotted_path(&self) -> Option<Vec<String>> {
        match self.kind {
            NodeKind::NameRef => self.ident().map(|n| vec![n.to_string()]),
            NodeKind::Attribute => {
                let mut base = self.children.first()?.dotted_path()?;
                base.push(self.ident()?.to_string());
                Some(base)
            }
            _ => None,
        }
    }
}

/// Structural equality ignoring spans and docstring text.
///
/// Used to compare generated code against reference sources where layout
/// and prose differ but the shape must match.
pub fn structurally_equal(a: &SyntaxNode, b: &SyntaxNode) -> bool {
    if a.kind != b.kind || a.children.len() != b.children.len() {
        return false;
    }
    let attrs_match = match (a.kind, &a.attr, &b.attr) {
        (NodeKind::Docstring, _, _) => true,
        (_, x, y) => x == y,
    };
    attrs_match
        && a.children
            .iter()
            .zip(b.children.iter())
            .all(|(x, y)| structurally_equal(x, y))
}

/// Checks that every node's span contains all of its children's spans.
/// Returns the first offending pair as (parent kind, child kind).
pub fn check_span_containment(root: &SyntaxNode) -> Result<(), (NodeKind, NodeKind)> {
    for child in &root.children {
        if !root.span.contains(&child.span) {
            return Err((root.kind, child.kind));
        }
        check_span_containment(child)?;
    }
    Ok(())
}
