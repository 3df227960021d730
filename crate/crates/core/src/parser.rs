//! Recursive-descent parser for the analyzed Python subset.
//!
//! Parsing never fails fatally: statements outside the subset grammar
//! degrade to [`NodeKind::Unsupported`] nodes covering exactly one statement
//! (including any indented suite), with a diagnostic, so analysis of the
//! rest of the file proceeds.

use crate::ast::{
    ArgTag, AssignAttr, IfAttr, ImportAlias, ImportDecl, NodeAttr, NodeKind, ParamAttr,
    SyntaxNode,
};
use crate::diagnostics::{codes, Diagnostic, Severity};
use crate::lexer::tokenize;
use crate::source::{SourceFile, Span};
use crate::token::{Comment, Token, TokenKind};

/// A parsed file: tree, diagnostics, and preserved comment trivia.
#[derive(Clone, Debug)]
pub struct ParsedModule {
    pub file: SourceFile,
    pub tree: SyntaxNode,
    pub diagnostics: Vec<Diagnostic>,
    pub comments: Vec<Comment>,
}

pub fn parse_module(file: SourceFile) -> ParsedModule {
    let lexed = tokenize(&file);
    let comments = lexed.comments();
    let mut parser = Parser {
        tokens: lexed.tokens,
        pos: 0,
        diagnostics: lexed.diagnostics,
        file: &file,
    };
    let mut stmts = parser.parse_statements_until(|t| t.kind == TokenKind::EndMarker);
    apply_docstring(&mut stmts);
    let end = file.text.len();
    let (end_line, end_col) = parser
        .tokens
        .last()
        .map(|t| (t.span.end_line, t.span.end_col))
        .unwrap_or((1, 1));
    let mut module = SyntaxNode::new(
        NodeKind::Module,
        Span::new(0, end, 1, 1, end_line, end_col),
    );
    module.children = stmts;
    let diagnostics = std::mem::take(&mut parser.diagnostics);
    ParsedModule {
        tree: module,
        diagnostics,
        comments,
        file,
    }
}

struct PErr {
    reason: String,
}

impl PErr {
    fn new(reason: impl Into<String>) -> Self {
        PErr {
            reason: reason.into(),
        }
    }
}

type PResult<T> = Result<T, PErr>;

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    diagnostics: Vec<Diagnostic>,
    file: &'a SourceFile,
}

impl<'a> Parser<'a> {
    // ---- token access ----

    fn peek(&self) -> &Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_at(&self, ahead: usize) -> &Token {
        &self.tokens[(self.pos + ahead).min(self.tokens.len() - 1)]
    }

    fn bump(&mut self) -> &Token {
        let idx = self.pos.min(self.tokens.len() - 1);
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        } else {
            self.pos = self.tokens.len();
        }
        &self.tokens[idx]
    }

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len() || self.peek().kind == TokenKind::EndMarker
    }

    fn prev_span(&self) -> Span {
        if self.pos == 0 {
            return self.peek().span;
        }
        self.tokens[(self.pos - 1).min(self.tokens.len() - 1)].span
    }

    fn expect_op(&mut self, op: &str) -> PResult<Span> {
        if self.peek().is_op(op) {
            Ok(self.bump().span)
        } else {
            Err(PErr::new(format!(
                "expected `{op}`, found `{}`",
                describe(self.peek())
            )))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> PResult<Span> {
        if self.peek().is_keyword(kw) {
            Ok(self.bump().span)
        } else {
            Err(PErr::new(format!(
                "expected `{kw}`, found `{}`",
                describe(self.peek())
            )))
        }
    }

    fn expect_ident(&mut self) -> PResult<(String, Span)> {
        if self.peek().kind == TokenKind::Ident {
            let token = self.bump();
            Ok((token.text.clone(), token.span))
        } else {
            Err(PErr::new(format!(
                "expected identifier, found `{}`",
                describe(self.peek())
            )))
        }
    }

    // ---- statements ----

    fn parse_statements_until(&mut self, stop: impl Fn(&Token) -> bool) -> Vec<SyntaxNode> {
        let mut out = Vec::new();
        loop {
            if self.at_end() || stop(self.peek()) {
                break;
            }
            if self.peek().kind == TokenKind::Newline {
                self.bump();
                continue;
            }
            let stmt = self.parse_statement();
            let compound = matches!(
                stmt.kind,
                NodeKind::FunctionDef | NodeKind::ClassDef | NodeKind::If | NodeKind::Unsupported
            );
            out.push(stmt);
            if !compound {
                if self.peek().is_op(";") {
                    self.bump();
                    continue;
                }
                if self.peek().kind == TokenKind::Newline {
                    self.bump();
                }
            }
        }
        out
    }

    fn parse_statement(&mut self) -> SyntaxNode {
        let start = self.pos;
        match self.try_statement() {
            Ok(node) => node,
            Err(err) => self.recover_unsupported(start, err),
        }
    }

    fn try_statement(&mut self) -> PResult<SyntaxNode> {
        let token = self.peek();
        let node = match &token.kind {
            TokenKind::Keyword => match token.text.as_str() {
                "import" => self.import_stmt(),
                "from" => self.from_import_stmt(),
                "def" => return self.function_def(Vec::new()),
                "class" => return self.class_def(Vec::new()),
                "return" => self.return_stmt(),
                "raise" => self.raise_stmt(),
                "pass" => self.pass_stmt(),
                "if" => return self.if_stmt(),
                other => Err(PErr::new(format!("unsupported construct `{other}`"))),
            },
            TokenKind::Op if token.text == "@" => return self.decorated_def(),
            TokenKind::Indent => Err(PErr::new("unexpected indentation")),
            _ => self.expr_or_assign_stmt(),
        }?;
        // Simple statements must stop at a statement boundary; anything else
        // means the line is outside the subset grammar.
        match &self.peek().kind {
            TokenKind::Newline | TokenKind::EndMarker => Ok(node),
            TokenKind::Op if self.peek().text == ";" => Ok(node),
            other => Err(PErr::new(format!(
                "trailing `{}` after statement",
                match other {
                    TokenKind::Str(_) => "string literal".to_string(),
                    _ => self.peek().text.clone(),
                }
            ))),
        }
    }

    /// Turns the statement starting at `start` into one `Unsupported` node,
    /// consuming through the end of the logical line and any indented suite.
    fn recover_unsupported(&mut self, start: usize, err: PErr) -> SyntaxNode {
        self.pos = start;
        let start_span = self.peek().span;
        if self.peek().kind == TokenKind::Indent {
            self.bump();
            self.skip_block(1);
        } else {
            while !self.at_end() && self.peek().kind != TokenKind::Newline {
                if self.peek().kind == TokenKind::Indent {
                    self.bump();
                    self.skip_block(1);
                    continue;
                }
                self.bump();
            }
            if self.peek().kind == TokenKind::Newline {
                self.bump();
            }
            if self.peek().kind == TokenKind::Indent {
                self.bump();
                self.skip_block(1);
            }
        }
        let span = Span::cover(start_span, self.prev_span());
        self.diagnostics.push(Diagnostic::new(
            codes::UNSUPPORTED_SYNTAX,
            Severity::Warning,
            self.file.module_id.clone(),
            span,
            format!("statement not in the supported subset: {}", err.reason),
        ));
        SyntaxNode::with_attr(NodeKind::Unsupported, span, NodeAttr::Reason(err.reason))
    }

    fn skip_block(&mut self, mut depth: u32) {
        while depth > 0 && !self.at_end() {
            match self.peek().kind {
                TokenKind::Indent => depth += 1,
                TokenKind::Dedent => depth -= 1,
                _ => {}
            }
            self.bump();
        }
    }

    fn import_stmt(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_keyword("import")?;
        let mut names = Vec::new();
        loop {
            let path = self.dotted_name()?;
            let alias = if self.peek().is_keyword("as") {
                self.bump();
                Some(self.expect_ident()?.0)
            } else {
                None
            };
            names.push(ImportAlias { path, alias });
            if self.peek().is_op(",") {
                self.bump();
            } else {
                break;
            }
        }
        let span = Span::cover(start, self.prev_span());
        Ok(SyntaxNode::with_attr(
            NodeKind::Import,
            span,
            NodeAttr::Import(ImportDecl {
                from_import: false,
                level: 0,
                module: Vec::new(),
                names,
                star: false,
            }),
        ))
    }

    fn from_import_stmt(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_keyword("from")?;
        let mut level: u32 = 0;
        loop {
            let token = self.peek();
            if token.is_op(".") {
                level += 1;
                self.bump();
            } else if token.is_op("...") {
                level += 3;
                self.bump();
            } else {
                break;
            }
        }
        let module = if self.peek().kind == TokenKind::Ident {
            self.dotted_name()?
        } else {
            Vec::new()
        };
        if level == 0 && module.is_empty() {
            return Err(PErr::new("from-import requires a module or dots"));
        }
        self.expect_keyword("import")?;
        let mut names = Vec::new();
        let mut star = false;
        if self.peek().is_op("*") {
            self.bump();
            star = true;
        } else {
            let parens = self.peek().is_op("(");
            if parens {
                self.bump();
            }
            loop {
                if parens && self.peek().is_op(")") {
                    break;
                }
                let (name, _) = self.expect_ident()?;
                let alias = if self.peek().is_keyword("as") {
                    self.bump();
                    Some(self.expect_ident()?.0)
                } else {
                    None
                };
                names.push(ImportAlias {
                    path: vec![name],
                    alias,
                });
                if self.peek().is_op(",") {
                    self.bump();
                } else {
                    break;
                }
            }
            if parens {
                self.expect_op(")")?;
            }
            if names.is_empty() {
                return Err(PErr::new("from-import with no names"));
            }
        }
        let span = Span::cover(start, self.prev_span());
        Ok(SyntaxNode::with_attr(
            NodeKind::ImportFrom,
            span,
            NodeAttr::Import(ImportDecl {
                from_import: true,
                level,
                module,
                names,
                star,
            }),
        ))
    }

    fn dotted_name(&mut self) -> PResult<Vec<String>> {
        let mut parts = vec![self.expect_ident()?.0];
        while self.peek().is_op(".") {
            self.bump();
            parts.push(self.expect_ident()?.0);
        }
        Ok(parts)
    }

    fn decorated_def(&mut self) -> PResult<SyntaxNode> {
        let mut decorators = Vec::new();
        while self.peek().is_op("@") {
            let at = self.bump().span;
            let expr = self.parse_expr()?;
            let span = Span::cover(at, self.prev_span());
            let mut node = SyntaxNode::new(NodeKind::Decorator, span);
            node.children.push(expr);
            decorators.push(node);
            if self.peek().kind == TokenKind::Newline {
                self.bump();
            }
        }
        if self.peek().is_keyword("def") {
            self.function_def(decorators)
        } else if self.peek().is_keyword("class") {
            self.class_def(decorators)
        } else {
            Err(PErr::new("decorator not followed by def or class"))
        }
    }

    fn function_def(&mut self, decorators: Vec<SyntaxNode>) -> PResult<SyntaxNode> {
        let start = decorators
            .first()
            .map(|d| d.span)
            .unwrap_or_else(|| self.peek().span);
        self.expect_keyword("def")?;
        let (name, _) = self.expect_ident()?;
        self.expect_op("(")?;
        let params = self.parameter_list()?;
        self.expect_op(")")?;
        if self.peek().is_op("->") {
            self.bump();
            // Return annotations are parsed for tolerance but not retained.
            self.parse_expr()?;
        }
        let mut body = self.parse_suite()?;
        apply_docstring(&mut body);
        let span = Span::cover(start, self.prev_span());
        let mut node =
            SyntaxNode::with_attr(NodeKind::FunctionDef, span, NodeAttr::Ident(name));
        node.children = decorators;
        node.children.extend(params);
        node.children.extend(body);
        Ok(node)
    }

    fn parameter_list(&mut self) -> PResult<Vec<SyntaxNode>> {
        let mut params = Vec::new();
        loop {
            if self.peek().is_op(")") {
                break;
            }
            let start_span = self.peek().span;
            let star: u8 = if self.peek().is_op("**") {
                self.bump();
                2
            } else if self.peek().is_op("*") {
                self.bump();
                1
            } else {
                0
            };
            let name = if self.peek().kind == TokenKind::Ident {
                self.expect_ident()?.0
            } else if star == 1 {
                String::new() // bare `*` separator
            } else {
                return Err(PErr::new("expected parameter name"));
            };
            let mut children = Vec::new();
            let mut has_annotation = false;
            let mut has_default = false;
            if self.peek().is_op(":") {
                self.bump();
                children.push(self.parse_expr()?);
                has_annotation = true;
            }
            if self.peek().is_op("=") {
                self.bump();
                children.push(self.parse_expr()?);
                has_default = true;
            }
            let span = Span::cover(start_span, self.prev_span());
            let mut node = SyntaxNode::with_attr(
                NodeKind::Parameter,
                span,
                NodeAttr::Param(ParamAttr {
                    name,
                    star,
                    has_annotation,
                    has_default,
                }),
            );
            node.children = children;
            params.push(node);
            if self.peek().is_op(",") {
                self.bump();
            } else {
                break;
            }
        }
        Ok(params)
    }

    fn class_def(&mut self, decorators: Vec<SyntaxNode>) -> PResult<SyntaxNode> {
        let start = decorators
            .first()
            .map(|d| d.span)
            .unwrap_or_else(|| self.peek().span);
        self.expect_keyword("class")?;
        let (name, _) = self.expect_ident()?;
        let mut bases = Vec::new();
        if self.peek().is_op("(") {
            self.bump();
            let (_, exprs) = self.call_arguments()?;
            self.expect_op(")")?;
            bases = exprs;
        }
        let mut body = self.parse_suite()?;
        apply_docstring(&mut body);
        let span = Span::cover(start, self.prev_span());
        let mut node = SyntaxNode::with_attr(NodeKind::ClassDef, span, NodeAttr::Ident(name));
        node.children = decorators;
        node.children.extend(bases);
        node.children.extend(body);
        Ok(node)
    }

    fn return_stmt(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_keyword("return")?;
        let mut node = SyntaxNode::new(NodeKind::Return, start);
        if self.starts_expression() {
            node.children.push(self.parse_testlist()?);
        }
        node.span = Span::cover(start, self.prev_span());
        Ok(node)
    }

    fn raise_stmt(&mut self) -> PResult<SyntaxNode> {
        let start = self.expect_keyword("raise")?;
        let mut node = SyntaxNode::new(NodeKind::Raise, start);
        if self.starts_expression() {
            node.children.push(self.parse_expr()?);
            if self.peek().is_keyword("from") {
                self.bump();
                node.children.push(self.parse_expr()?);
            }
        }
        node.span = Span::cover(start, self.prev_span());
        Ok(node)
    }

    fn pass_stmt(&mut self) -> PResult<SyntaxNode> {
        let span = self.expect_keyword("pass")?;
        Ok(SyntaxNode::new(NodeKind::Pass, span))
    }

    fn if_stmt(&mut self) -> PResult<SyntaxNode> {
        let start = if self.peek().is_keyword("if") {
            self.expect_keyword("if")?
        } else {
            self.expect_keyword("elif")?
        };
        let test = self.parse_expr()?;
        let body = self.parse_suite()?;
        let mut orelse = Vec::new();
        if self.peek().is_keyword("elif") {
            orelse.push(self.if_stmt()?);
        } else if self.peek().is_keyword("else") {
            self.bump();
            orelse = self.parse_suite()?;
        }
        let span = Span::cover(start, self.prev_span());
        let mut node = SyntaxNode::with_attr(
            NodeKind::If,
            span,
            NodeAttr::If(IfAttr { n_body: body.len() }),
        );
        node.children.push(test);
        node.children.extend(body);
        node.children.extend(orelse);
        Ok(node)
    }

    fn parse_suite(&mut self) -> PResult<Vec<SyntaxNode>> {
        self.expect_op(":")?;
        if self.peek().kind == TokenKind::Newline {
            self.bump();
            if self.peek().kind != TokenKind::Indent {
                return Err(PErr::new("expected an indented block"));
            }
            self.bump();
            let stmts = self.parse_statements_until(|t| t.kind == TokenKind::Dedent);
            if self.peek().kind == TokenKind::Dedent {
                self.bump();
            }
            if stmts.is_empty() {
                return Err(PErr::new("empty block"));
            }
            Ok(stmts)
        } else {
            // Simple suite on the same line: `def f(): return 1`.
            let mut stmts = Vec::new();
            loop {
                let stmt = self.try_statement()?;
                if matches!(
                    stmt.kind,
                    NodeKind::FunctionDef | NodeKind::ClassDef | NodeKind::If
                ) {
                    return Err(PErr::new("compound statement in a one-line suite"));
                }
                stmts.push(stmt);
                if self.peek().is_op(";") {
                    self.bump();
                    if self.peek().kind == TokenKind::Newline {
                        break;
                    }
                    continue;
                }
                break;
            }
            if self.peek().kind == TokenKind::Newline {
                self.bump();
            }
            Ok(stmts)
        }
    }

    fn expr_or_assign_stmt(&mut self) -> PResult<SyntaxNode> {
        let start_span = self.peek().span;
        let first = self.parse_testlist()?;
        let token = self.peek().clone();
        if token.is_op("=") {
            let mut targets = vec![first];
            let value;
            loop {
                self.bump();
                let expr = self.parse_testlist()?;
                if self.peek().is_op("=") {
                    targets.push(expr);
                } else {
                    value = expr;
                    break;
                }
            }
            for target in &targets {
                check_assignable(target)?;
            }
            let n_targets = targets.len();
            let span = Span::cover(start_span, self.prev_span());
            let mut node = SyntaxNode::with_attr(
                NodeKind::Assign,
                span,
                NodeAttr::Assign(AssignAttr {
                    n_targets,
                    has_annotation: false,
                    has_value: true,
                }),
            );
            node.children = targets;
            node.children.push(value);
            return Ok(node);
        }
        if token.is_op(":") {
            check_assignable(&first)?;
            self.bump();
            let annotation = self.parse_expr()?;
            let mut has_value = false;
            let mut children = vec![first, annotation];
            if self.peek().is_op("=") {
                self.bump();
                children.push(self.parse_testlist()?);
                has_value = true;
            }
            let span = Span::cover(start_span, self.prev_span());
            let mut node = SyntaxNode::with_attr(
                NodeKind::Assign,
                span,
                NodeAttr::Assign(AssignAttr {
                    n_targets: 1,
                    has_annotation: true,
                    has_value,
                }),
            );
            node.children = children;
            return Ok(node);
        }
        const AUG_OPS: [&str; 13] = [
            "+=", "-=", "*=", "/=", "//=", "%=", "**=", "&=", "|=", "^=", ">>=", "<<=", "@=",
        ];
        if token.kind == TokenKind::Op && AUG_OPS.contains(&token.text.as_str()) {
            check_assignable(&first)?;
            let op = token.text.clone();
            self.bump();
            let value = self.parse_testlist()?;
            let span = Span::cover(start_span, self.prev_span());
            let mut node = SyntaxNode::with_attr(NodeKind::AugAssign, span, NodeAttr::Op(op));
            node.children = vec![first, value];
            return Ok(node);
        }
        let span = Span::cover(start_span, self.prev_span());
        let mut node = SyntaxNode::new(NodeKind::ExprStmt, span);
        node.children.push(first);
        Ok(node)
    }

    // ---- expressions ----

    fn starts_expression(&self) -> bool {
        let token = self.peek();
        match &token.kind {
            TokenKind::Ident | TokenKind::Number | TokenKind::Str(_) => true,
            TokenKind::Keyword => matches!(token.text.as_str(), "True" | "False" | "None" | "not"),
            TokenKind::Op => matches!(token.text.as_str(), "(" | "[" | "{" | "-" | "+" | "~"),
            _ => false,
        }
    }

    /// Expression possibly followed by tuple commas.
    fn parse_testlist(&mut self) -> PResult<SyntaxNode> {
        let start_span = self.peek().span;
        let first = self.parse_expr()?;
        if !self.peek().is_op(",") {
            return Ok(first);
        }
        let mut elements = vec![first];
        while self.peek().is_op(",") {
            self.bump();
            if !self.starts_expression() {
                break;
            }
            elements.push(self.parse_expr()?);
        }
        let span = Span::cover(start_span, self.prev_span());
        let mut node = SyntaxNode::new(NodeKind::TupleLit, span);
        node.children = elements;
        Ok(node)
    }

    fn parse_expr(&mut self) -> PResult<SyntaxNode> {
        let expr = self.parse_or()?;
        if self.peek().is_keyword("if") {
            return Err(PErr::new("conditional expressions are not supported"));
        }
        Ok(expr)
    }

    fn parse_or(&mut self) -> PResult<SyntaxNode> {
        let start_span = self.peek().span;
        let first = self.parse_and()?;
        if !self.peek().is_keyword("or") {
            return Ok(first);
        }
        let mut operands = vec![first];
        while self.peek().is_keyword("or") {
            self.bump();
            operands.push(self.parse_and()?);
        }
        let span = Span::cover(start_span, self.prev_span());
        let mut node = SyntaxNode::with_attr(NodeKind::BoolOp, span, NodeAttr::Op("or".into()));
        node.children = operands;
        Ok(node)
    }

    fn parse_and(&mut self) -> PResult<SyntaxNode> {
        let start_span = self.peek().span;
        let first = self.parse_not()?;
        if !self.peek().is_keyword("and") {
            return Ok(first);
        }
        let mut operands = vec![first];
        while self.peek().is_keyword("and") {
            self.bump();
            operands.push(self.parse_not()?);
        }
        let span = Span::cover(start_span, self.prev_span());
        let mut node = SyntaxNode::with_attr(NodeKind::BoolOp, span, NodeAttr::Op("and".into()));
        node.children = operands;
        Ok(node)
    }

    fn parse_not(&mut self) -> PResult<SyntaxNode> {
        if self.peek().is_keyword("not") {
            let start = self.bump().span;
            let operand = self.parse_not()?;
            let span = Span::cover(start, self.prev_span());
            let mut node =
                SyntaxNode::with_attr(NodeKind::UnaryOp, span, NodeAttr::Op("not".into()));
            node.children.push(operand);
            return Ok(node);
        }
        self.parse_comparison()
    }

    fn comparison_op(&mut self) -> Option<String> {
        let token = self.peek();
        if token.kind == TokenKind::Op
            && matches!(token.text.as_str(), "<" | ">" | "<=" | ">=" | "==" | "!=")
        {
            let op = token.text.clone();
            self.bump();
            return Some(op);
        }
        if token.is_keyword("in") {
            self.bump();
            return Some("in".into());
        }
        if token.is_keyword("is") {
            self.bump();
            if self.peek().is_keyword("not") {
                self.bump();
                return Some("is not".into());
            }
            return Some("is".into());
        }
        if token.is_keyword("not") && self.peek_at(1).is_keyword("in") {
            self.bump();
            self.bump();
            return Some("not in".into());
        }
        None
    }

    fn parse_comparison(&mut self) -> PResult<SyntaxNode> {
        let start_span = self.peek().span;
        let first = self.parse_binary(0)?;
        let mut ops = Vec::new();
        let mut operands = vec![first];
        while let Some(op) = self.comparison_op() {
            ops.push(op);
            operands.push(self.parse_binary(0)?);
        }
        if ops.is_empty() {
            return Ok(operands.pop().unwrap());
        }
        let span = Span::cover(start_span, self.prev_span());
        let mut node = SyntaxNode::with_attr(NodeKind::Compare, span, NodeAttr::Ops(ops));
        node.children = operands;
        Ok(node)
    }

    /// Binary operators by precedence level, loosest first.
    fn parse_binary(&mut self, level: usize) -> PResult<SyntaxNode> {
        const LEVELS: [&[&str]; 6] = [
            &["|"],
            &["^"],
            &["&"],
            &["<<", ">>"],
            &["+", "-"],
            &["*", "/", "//", "%", "@"],
        ];
        if level >= LEVELS.len() {
            return self.parse_factor();
        }
        let start_span = self.peek().span;
        let mut left = self.parse_binary(level + 1)?;
        loop {
            let token = self.peek();
            if token.kind == TokenKind::Op && LEVELS[level].contains(&token.text.as_str()) {
                let op = token.text.clone();
                self.bump();
                let right = self.parse_binary(level + 1)?;
                let span = Span::cover(start_span, self.prev_span());
                let mut node = SyntaxNode::with_attr(NodeKind::BinOp, span, NodeAttr::Op(op));
                node.children = vec![left, right];
                left = node;
            } else {
                break;
            }
        }
        Ok(left)
    }

    fn parse_factor(&mut self) -> PResult<SyntaxNode> {
        let token = self.peek();
        if token.kind == TokenKind::Op && matches!(token.text.as_str(), "-" | "+" | "~") {
            let op = token.text.clone();
            let start = self.bump().span;
            let operand = self.parse_factor()?;
            let span = Span::cover(start, self.prev_span());
            let mut node = SyntaxNode::with_attr(NodeKind::UnaryOp, span, NodeAttr::Op(op));
            node.children.push(operand);
            return Ok(node);
        }
        self.parse_power()
    }

    fn parse_power(&mut self) -> PResult<SyntaxNode> {
        let start_span = self.peek().span;
        let base = self.parse_postfix()?;
        if self.peek().is_op("**") {
            self.bump();
            let exponent = self.parse_factor()?;
            let span = Span::cover(start_span, self.prev_span());
            let mut node = SyntaxNode::with_attr(NodeKind::BinOp, span, NodeAttr::Op("**".into()));
            node.children = vec![base, exponent];
            return Ok(node);
        }
        Ok(base)
    }

    fn parse_postfix(&mut self) -> PResult<SyntaxNode> {
        let start_span = self.peek().span;
        let mut expr = self.parse_atom()?;
        loop {
            let token = self.peek();
            if token.is_op(".") {
                self.bump();
                let (name, _) = self.expect_ident()?;
                let span = Span::cover(start_span, self.prev_span());
                let mut node =
                    SyntaxNode::with_attr(NodeKind::Attribute, span, NodeAttr::Ident(name));
                node.children.push(expr);
                expr = node;
            } else if token.is_op("(") {
                self.bump();
                let (tags, args) = self.call_arguments()?;
                self.expect_op(")")?;
                let span = Span::cover(start_span, self.prev_span());
                let mut node =
                    SyntaxNode::with_attr(NodeKind::Call, span, NodeAttr::CallArgs(tags));
                node.children.push(expr);
                node.children.extend(args);
                expr = node;
            } else if token.is_op("[") {
                self.bump();
                let index = self.parse_testlist()?;
                self.expect_op("]")?;
                let span = Span::cover(start_span, self.prev_span());
                let mut node = SyntaxNode::new(NodeKind::Subscript, span);
                node.children = vec![expr, index];
                expr = node;
            } else {
                break;
            }
        }
        Ok(expr)
    }

    fn call_arguments(&mut self) -> PResult<(Vec<ArgTag>, Vec<SyntaxNode>)> {
        let mut tags = Vec::new();
        let mut args = Vec::new();
        loop {
            if self.peek().is_op(")") {
                break;
            }
            if self.peek().is_op("**") {
                self.bump();
                tags.push(ArgTag::DoubleStar);
                args.push(self.parse_expr()?);
            } else if self.peek().is_op("*") {
                self.bump();
                tags.push(ArgTag::Star);
                args.push(self.parse_expr()?);
            } else if self.peek().kind == TokenKind::Ident
                && self.peek_at(1).is_op("=")
            {
                let (name, _) = self.expect_ident()?;
                self.bump(); // `=`
                tags.push(ArgTag::Keyword(name));
                args.push(self.parse_expr()?);
            } else {
                tags.push(ArgTag::Positional);
                args.push(self.parse_expr()?);
            }
            if self.peek().is_op(",") {
                self.bump();
            } else {
                break;
            }
        }
        Ok((tags, args))
    }

    fn parse_atom(&mut self) -> PResult<SyntaxNode> {
        let token = self.peek().clone();
        match &token.kind {
            TokenKind::Ident => {
                self.bump();
                Ok(SyntaxNode::with_attr(
                    NodeKind::NameRef,
                    token.span,
                    NodeAttr::Ident(token.text),
                ))
            }
            TokenKind::Keyword if matches!(token.text.as_str(), "True" | "False" | "None") => {
                self.bump();
                Ok(SyntaxNode::with_attr(
                    NodeKind::NameRef,
                    token.span,
                    NodeAttr::Ident(token.text),
                ))
            }
            TokenKind::Keyword => Err(PErr::new(format!(
                "unsupported expression `{}`",
                token.text
            ))),
            TokenKind::Number => {
                self.bump();
                Ok(SyntaxNode::with_attr(
                    NodeKind::NumberLit,
                    token.span,
                    NodeAttr::Num(token.text),
                ))
            }
            TokenKind::Str(value) => {
                let mut value = value.clone();
                let mut span = token.span;
                self.bump();
                // Adjacent string literals concatenate implicitly.
                while let TokenKind::Str(next) = &self.peek().kind {
                    value.push_str(next);
                    span = Span::cover(span, self.peek().span);
                    self.bump();
                }
                Ok(SyntaxNode::with_attr(
                    NodeKind::StringLit,
                    span,
                    NodeAttr::Str(value),
                ))
            }
            TokenKind::Op => match token.text.as_str() {
                "(" => {
                    self.bump();
                    if self.peek().is_op(")") {
                        let close = self.bump().span;
                        return Ok(SyntaxNode::new(
                            NodeKind::TupleLit,
                            Span::cover(token.span, close),
                        ));
                    }
                    let first = self.parse_expr()?;
                    if self.peek().is_op(",") {
                        let mut elements = vec![first];
                        while self.peek().is_op(",") {
                            self.bump();
                            if self.peek().is_op(")") {
                                break;
                            }
                            elements.push(self.parse_expr()?);
                        }
                        let close = self.expect_op(")")?;
                        let mut node = SyntaxNode::new(
                            NodeKind::TupleLit,
                            Span::cover(token.span, close),
                        );
                        node.children = elements;
                        return Ok(node);
                    }
                    self.expect_op(")")?;
                    Ok(first)
                }
                "[" => {
                    self.bump();
                    let mut elements = Vec::new();
                    loop {
                        if self.peek().is_op("]") {
                            break;
                        }
                        elements.push(self.parse_expr()?);
                        if self.peek().is_op(",") {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let close = self.expect_op("]")?;
                    let mut node =
                        SyntaxNode::new(NodeKind::ListLit, Span::cover(token.span, close));
                    node.children = elements;
                    Ok(node)
                }
                "{" => {
                    self.bump();
                    let mut children = Vec::new();
                    loop {
                        if self.peek().is_op("}") {
                            break;
                        }
                        let key = self.parse_expr()?;
                        if !self.peek().is_op(":") {
                            return Err(PErr::new("set literals are not supported"));
                        }
                        self.bump();
                        let value = self.parse_expr()?;
                        children.push(key);
                        children.push(value);
                        if self.peek().is_op(",") {
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let close = self.expect_op("}")?;
                    let mut node =
                        SyntaxNode::new(NodeKind::DictLit, Span::cover(token.span, close));
                    node.children = children;
                    Ok(node)
                }
                ":=" => Err(PErr::new("assignment expressions are not supported")),
                other => Err(PErr::new(format!("unexpected `{other}`"))),
            },
            other => Err(PErr::new(format!("unexpected {}", other.name()))),
        }
    }
}

fn check_assignable(target: &SyntaxNode) -> PResult<()> {
    match target.kind {
        NodeKind::NameRef | NodeKind::Attribute | NodeKind::Subscript => Ok(()),
        NodeKind::TupleLit | NodeKind::ListLit => {
            target.children.iter().try_for_each(check_assignable)
        }
        _ => Err(PErr::new("target is not assignable")),
    }
}

/// Retags a leading string-literal expression statement as a docstring.
fn apply_docstring(stmts: &mut [SyntaxNode]) {
    if let Some(first) = stmts.first_mut() {
        if first.kind == NodeKind::ExprStmt
            && first.children.len() == 1
            && first.children[0].kind == NodeKind::StringLit
        {
            let value = first.children[0]
                .string_value()
                .unwrap_or_default()
                .to_string();
            *first = SyntaxNode::with_attr(NodeKind::Docstring, first.span, NodeAttr::Str(value));
        }
    }
}

fn describe(token: &Token) -> String {
    match &token.kind {
        TokenKind::Newline => "end of line".to_string(),
        TokenKind::Indent => "indent".to_string(),
        TokenKind::Dedent => "dedent".to_string(),
        TokenKind::EndMarker => "end of file".to_string(),
        TokenKind::Str(_) => "string literal".to_string(),
        _ => token.text.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::ModuleId;

    fn parse(text: &str) -> ParsedModule {
        parse_module(SourceFile::new(
            "test.py",
            ModuleId::from_dotted("test").unwrap(),
            text,
        ))
    }

    #[test]
    fn empty_module_parses() {
        let parsed = parse("");
        assert_eq!(parsed.tree.kind, NodeKind::Module);
        assert!(parsed.tree.children.is_empty());
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn class_with_methods() {
        let parsed = parse(
            "class A:\n    def f(self):\n        return 1\n\n    def g(self, x):\n        pass\n",
        );
        let class = &parsed.tree.children[0];
        assert_eq!(class.kind, NodeKind::ClassDef);
        assert_eq!(class.ident(), Some("A"));
        let methods: Vec<_> = class
            .class_body()
            .iter()
            .filter(|n| n.kind == NodeKind::FunctionDef)
            .map(|n| n.ident().unwrap().to_string())
            .collect();
        assert_eq!(methods, vec!["f", "g"]);
    }

    #[test]
    fn docstrings_are_tagged() {
        let parsed = parse("\"\"\"module doc\"\"\"\n\ndef f():\n    \"fn doc\"\n    pass\n");
        assert_eq!(parsed.tree.children[0].kind, NodeKind::Docstring);
        let func = &parsed.tree.children[1];
        assert_eq!(func.func_body()[0].kind, NodeKind::Docstring);
    }

    #[test]
    fn match_statement_degrades_to_one_unsupported_node() {
        let parsed = parse("match x:\n    case 1:\n        pass\n");
        assert_eq!(parsed.tree.children.len(), 1);
        assert_eq!(parsed.tree.children[0].kind, NodeKind::Unsupported);
        assert_eq!(
            parsed
                .diagnostics
                .iter()
                .filter(|d| d.code == codes::UNSUPPORTED_SYNTAX)
                .count(),
            1
        );
    }

    #[test]
    fn for_loop_with_block_is_one_unsupported_node() {
        let parsed = parse("x = 1\nfor i in range(3):\n    y = i\n    z = i\nw = 2\n");
        let kinds: Vec<_> = parsed.tree.children.iter().map(|c| c.kind).collect();
        assert_eq!(
            kinds,
            vec![NodeKind::Assign, NodeKind::Unsupported, NodeKind::Assign]
        );
    }

    #[test]
    fn chained_and_annotated_assignments() {
        let parsed = parse("a = b = 1\nc: int = 2\nd += 3\n");
        let stmts = &parsed.tree.children;
        assert_eq!(stmts[0].assign_targets().len(), 2);
        assert!(stmts[1].assign_annotation().is_some());
        assert_eq!(stmts[2].kind, NodeKind::AugAssign);
    }

    #[test]
    fn relative_import_levels() {
        let parsed = parse("from ._core import array\nfrom ..x import y as z\n");
        let first = parsed.tree.children[0].import_decl().unwrap();
        assert_eq!(first.level, 1);
        assert_eq!(first.module, vec!["_core"]);
        let second = parsed.tree.children[1].import_decl().unwrap();
        assert_eq!(second.level, 2);
        assert_eq!(second.names[0].alias.as_deref(), Some("z"));
    }

    #[test]
    fn call_args_keep_order_and_tags() {
        let parsed = parse("f(a, b=c, *d, **e)\n");
        let call = &parsed.tree.children[0].children[0];
        assert_eq!(call.kind, NodeKind::Call);
        let args = call.call_args();
        assert_eq!(args.len(), 4);
        assert!(matches!(args[0].0, ArgTag::Positional));
        assert!(matches!(args[1].0, ArgTag::Keyword(k) if k == "b"));
        assert!(matches!(args[2].0, ArgTag::Star));
        assert!(matches!(args[3].0, ArgTag::DoubleStar));
    }

    #[test]
    fn multiline_dict_parses_via_implicit_joining() {
        let parsed = parse("def f(self):\n    return {\n        \"a\": 1,\n        \"b\": x,\n    }\n");
        let func = &parsed.tree.children[0];
        let ret = func.func_body()[0];
        assert_eq!(ret.kind, NodeKind::Return);
        assert_eq!(ret.children[0].kind, NodeKind::DictLit);
        assert!(parsed.diagnostics.is_empty());
    }

    #[test]
    fn comparison_chains_and_boolops() {
        let parsed = parse("ok = a < b <= c and not d\n");
        let value = parsed.tree.children[0].assign_value().unwrap();
        assert_eq!(value.kind, NodeKind::BoolOp);
        assert_eq!(value.children[0].kind, NodeKind::Compare);
        assert_eq!(value.children[1].kind, NodeKind::UnaryOp);
    }

    #[test]
    fn parsing_is_deterministic() {
        let text = "class A:\n    def f(self):\n        return self._impl.f()\n";
        let a = parse(text);
        let b = parse(text);
        assert_eq!(a.tree, b.tree);
    }
}
