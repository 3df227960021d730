//! Indentation-sensitive tokenizer.
//!
//! Physical lines are folded into logical lines (implicit joining inside
//! brackets, explicit joining with a trailing backslash), indentation is
//! converted to matched `Indent`/`Dedent` pairs, and comments are kept as
//! trivia attached to the following token. Lexical errors are reported as
//! diagnostics and tokenization continues on the next line.

use crate::diagnostics::{codes, Diagnostic, Severity};
use crate::source::{SourceFile, Span};
use crate::token::{is_keyword, Comment, Token, TokenKind};

pub struct LexOutput {
    pub tokens: Vec<Token>,
    pub diagnostics: Vec<Diagnostic>,
}

impl LexOutput {
    /// All comments in source order, flattened out of token trivia.
    pub fn comments(&self) -> Vec<Comment> {
        let mut out = Vec::new();
        for token in &self.tokens {
            out.extend(token.trivia.iter().cloned());
        }
        out
    }
}

const TAB_SIZE: u32 = 8;

pub fn tokenize(source: &SourceFile) -> LexOutput {
    Lexer::new(source).run()
}

struct Lexer<'a> {
    source: &'a SourceFile,
    chars: Vec<(usize, char)>,
    pos: usize,
    line: u32,
    col: u32,
    indent_stack: Vec<u32>,
    bracket_depth: u32,
    pending_trivia: Vec<Comment>,
    tokens: Vec<Token>,
    diagnostics: Vec<Diagnostic>,
    tokens_on_physical_line: bool,
    tokens_on_logical_line: bool,
}

impl<'a> Lexer<'a> {
    fn new(source: &'a SourceFile) -> Self {
        let mut text = source.text.as_str();
        let mut start_offset = 0;
        if let Some(stripped) = text.strip_prefix('\u{feff}') {
            start_offset = '\u{feff}'.len_utf8();
            text = stripped;
        }
        let chars = text
            .char_indices()
            .map(|(i, c)| (i + start_offset, c))
            .collect();
        Lexer {
            source,
            chars,
            pos: 0,
            line: 1,
            col: 1,
            indent_stack: vec![0],
            bracket_depth: 0,
            pending_trivia: Vec::new(),
            tokens: Vec::new(),
            diagnostics: Vec::new(),
            tokens_on_physical_line: false,
            tokens_on_logical_line: false,
        }
    }

    fn run(mut self) -> LexOutput {
        self.check_encoding_declaration();
        loop {
            // Line start: fold blank and comment-only lines, then apply
            // indentation. Inside brackets we never come back here.
            if !self.consume_line_starts() {
                break;
            }
            self.lex_logical_line();
        }
        if self.tokens_on_logical_line {
            self.emit_synthetic(TokenKind::Newline);
            self.tokens_on_logical_line = false;
        }
        while *self.indent_stack.last().unwrap() > 0 {
            self.indent_stack.pop();
            self.emit_synthetic(TokenKind::Dedent);
        }
        self.emit_synthetic(TokenKind::EndMarker);
        LexOutput {
            tokens: self.tokens,
            diagnostics: self.diagnostics,
        }
    }

    /// Consumes blank/comment-only lines and processes the indentation of the
    /// next content line. Returns false at end of input.
    fn consume_line_starts(&mut self) -> bool {
        loop {
            let line_start = self.pos;
            let (width, mixed) = self.measure_indent();
            match self.peek() {
                None => return false,
                Some('\n') | Some('\r') => {
                    self.consume_newline();
                    continue;
                }
                Some('#') => {
                    self.consume_comment(true);
                    self.consume_newline();
                    continue;
                }
                Some(_) => {
                    if mixed {
                        let span = self.span_from(line_start);
                        self.diag(
                            codes::INCONSISTENT_INDENT,
                            span,
                            "indentation mixes tabs after spaces",
                        );
                    }
                    self.apply_indent(width, line_start);
                    return true;
                }
            }
        }
    }

    fn measure_indent(&mut self) -> (u32, bool) {
        let mut width = 0;
        let mut seen_space = false;
        let mut mixed = false;
        while let Some(c) = self.peek() {
            match c {
                ' ' => {
                    seen_space = true;
                    width += 1;
                    self.advance();
                }
                '\t' => {
                    if seen_space {
                        mixed = true;
                    }
                    width = (width / TAB_SIZE + 1) * TAB_SIZE;
                    self.advance();
                }
                '\u{c}' => {
                    // Form feed resets the count, matching the reference tokenizer.
                    width = 0;
                    self.advance();
                }
                _ => break,
            }
        }
        (width, mixed)
    }

    fn apply_indent(&mut self, width: u32, line_start: usize) {
        let top = *self.indent_stack.last().unwrap();
        if width > top {
            self.indent_stack.push(width);
            let span = self.span_from(line_start);
            self.emit(TokenKind::Indent, String::new(), span);
            return;
        }
        while width < *self.indent_stack.last().unwrap() {
            self.indent_stack.pop();
            self.emit_synthetic(TokenKind::Dedent);
        }
        if width != *self.indent_stack.last().unwrap() {
            let span = self.span_from(line_start);
            self.diag(
                codes::INCONSISTENT_INDENT,
                span,
                "unindent does not match any outer indentation level",
            );
            // Recover by opening a fresh block at this width.
            self.indent_stack.push(width);
            self.emit(TokenKind::Indent, String::new(), span);
        }
    }

    fn lex_logical_line(&mut self) {
        self.tokens_on_logical_line = false;
        loop {
            match self.peek() {
                None => {
                    if self.tokens_on_logical_line {
                        self.emit_synthetic(TokenKind::Newline);
                        self.tokens_on_logical_line = false;
                    }
                    return;
                }
                Some(' ') | Some('\t') | Some('\u{c}') => {
                    self.advance();
                }
                Some('#') => {
                    self.consume_comment(!self.tokens_on_physical_line);
                }
                Some('\\') if self.peek_at(1) == Some('\n') || self.peek_at(1) == Some('\r') => {
                    self.advance();
                    self.consume_newline();
                }
                Some('\n') | Some('\r') => {
                    if self.bracket_depth > 0 {
                        self.consume_newline();
                        continue;
                    }
                    let start = self.pos;
                    self.consume_newline();
                    if self.tokens_on_logical_line {
                        let span = self.span_from(start);
                        self.emit(TokenKind::Newline, String::new(), span);
                        self.tokens_on_logical_line = false;
                    }
                    return;
                }
                Some(c) => {
                    self.lex_token(c);
                }
            }
        }
    }

    fn lex_token(&mut self, c: char) {
        if c == '"' || c == '\'' {
            self.lex_string(self.pos);
            return;
        }
        if c == '_' || c.is_alphabetic() {
            self.lex_word();
            return;
        }
        if c.is_ascii_digit() || (c == '.' && self.peek_at(1).is_some_and(|d| d.is_ascii_digit()))
        {
            self.lex_number();
            return;
        }
        self.lex_operator(c);
    }

    fn lex_word(&mut self) {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '_' || c.is_alphanumeric() {
                self.advance();
            } else {
                break;
            }
        }
        let text: String = self.text_between(start, self.pos);
        // String prefixes: r, b, u, f and two-letter combinations.
        if text.len() <= 2
            && text.chars().all(|c| "rRbBuUfF".contains(c))
            && matches!(self.peek(), Some('"') | Some('\''))
        {
            self.lex_string(start);
            return;
        }
        let span = self.span_from(start);
        let kind = if is_keyword(&text) {
            TokenKind::Keyword
        } else {
            TokenKind::Ident
        };
        self.emit(kind, text, span);
    }

    fn lex_number(&mut self) {
        let start = self.pos;
        if self.peek() == Some('0')
            && matches!(
                self.peek_at(1),
                Some('x') | Some('X') | Some('o') | Some('O') | Some('b') | Some('B')
            )
        {
            self.advance();
            self.advance();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    self.advance();
                } else {
                    break;
                }
            }
        } else {
            let mut seen_dot = false;
            let mut seen_exp = false;
            while let Some(c) = self.peek() {
                match c {
                    '0'..='9' | '_' => {
                        self.advance();
                    }
                    '.' if !seen_dot && !seen_exp => {
                        seen_dot = true;
                        self.advance();
                    }
                    'e' | 'E' if !seen_exp => {
                        seen_exp = true;
                        self.advance();
                        if matches!(self.peek(), Some('+') | Some('-')) {
                            self.advance();
                        }
                    }
                    'j' | 'J' => {
                        self.advance();
                        break;
                    }
                    _ => break,
                }
            }
        }
        let text = self.text_between(start, self.pos);
        let span = self.span_from(start);
        self.emit(TokenKind::Number, text, span);
    }

    fn lex_string(&mut self, start: usize) {
        // `start` points at the prefix (if any); the current position is the
        // prefix end. Advance past prefix characters first.
        while self.pos < self.chars.len() && !matches!(self.peek(), Some('"') | Some('\'')) {
            self.advance();
        }
        let prefix: String = self.text_between(start, self.pos).to_lowercase();
        let raw = prefix.contains('r');
        let quote = match self.peek() {
            Some(q) => q,
            None => return,
        };
        self.advance();
        let triple = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if triple {
            self.advance();
            self.advance();
        }
        let mut value = String::new();
        let mut closed = false;
        while let Some(c) = self.peek() {
            if c == '\\' && !raw {
                self.advance();
                if let Some(esc) = self.peek() {
                    self.advance();
                    value.push_str(&cook_escape(esc, self));
                }
                continue;
            }
            if c == '\\' && raw {
                // Raw strings keep the backslash but it still escapes a quote.
                self.advance();
                value.push('\\');
                if let Some(next) = self.peek() {
                    if next == quote {
                        value.push(next);
                        self.advance();
                    }
                }
                continue;
            }
            if c == quote {
                if triple {
                    if self.peek_at(1) == Some(quote) && self.peek_at(2) == Some(quote) {
                        self.advance();
                        self.advance();
                        self.advance();
                        closed = true;
                        break;
                    }
                    value.push(c);
                    self.advance();
                    continue;
                }
                self.advance();
                closed = true;
                break;
            }
            if (c == '\n' || c == '\r') && !triple {
                break;
            }
            value.push(c);
            self.advance();
        }
        let span = self.span_from(start);
        if !closed {
            self.diag(codes::UNTERMINATED_STRING, span, "unterminated string literal");
        }
        let text = self.text_between(start, self.pos);
        self.emit(TokenKind::Str(value), text, span);
    }

    fn lex_operator(&mut self, first: char) {
        const THREE: [&str; 5] = ["**=", "//=", ">>=", "<<=", "..."];
        const TWO: [&str; 19] = [
            "**", "//", "<<", ">>", "<=", ">=", "==", "!=", "->", ":=", "+=", "-=", "*=", "/=",
            "%=", "&=", "|=", "^=", "@=",
        ];
        const ONE: &str = "+-*/%@&|^~<>()[]{},:.;=";

        let start = self.pos;
        let lookahead: String = (0..3).filter_map(|i| self.peek_at(i)).collect();
        let op_len = if THREE.iter().any(|op| lookahead.starts_with(op)) {
            3
        } else if TWO.iter().any(|op| lookahead.starts_with(op)) {
            2
        } else if ONE.contains(first) {
            1
        } else {
            // Stray character: emit it as an operator token; the parser will
            // degrade the statement with a reason.
            1
        };
        for _ in 0..op_len {
            self.advance();
        }
        let text = self.text_between(start, self.pos);
        match text.as_str() {
            "(" | "[" | "{" => self.bracket_depth += 1,
            ")" | "]" | "}" => self.bracket_depth = self.bracket_depth.saturating_sub(1),
            _ => {}
        }
        let span = self.span_from(start);
        self.emit(TokenKind::Op, text, span);
    }

    fn consume_comment(&mut self, own_line: bool) {
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c == '\n' || c == '\r' {
                break;
            }
            self.advance();
        }
        let text = self.text_between(start, self.pos);
        let span = self.span_from(start);
        self.pending_trivia.push(Comment {
            text,
            span,
            own_line,
        });
    }

    fn consume_newline(&mut self) {
        if self.peek() == Some('\r') {
            self.advance();
        }
        if self.peek() == Some('\n') {
            self.advance();
        }
        self.tokens_on_physical_line = false;
    }

    fn check_encoding_declaration(&mut self) {
        for (index, line) in self.source.text.lines().take(2).enumerate() {
            let trimmed = line.trim_start();
            if !trimmed.starts_with('#') {
                continue;
            }
            if let Some(coding) = extract_coding(trimmed) {
                let normalized = coding.to_lowercase().replace('_', "-");
                if !matches!(normalized.as_str(), "utf-8" | "utf8" | "ascii" | "us-ascii") {
                    let line_no = index as u32 + 1;
                    let span = Span::new(0, 0, line_no, 1, line_no, 1);
                    self.diag(
                        codes::BAD_ENCODING,
                        span,
                        format!("declared source encoding `{coding}` is not UTF-8"),
                    );
                }
            }
        }
    }

    // ---- low-level helpers ----

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).map(|&(_, c)| c)
    }

    fn peek_at(&self, ahead: usize) -> Option<char> {
        self.chars.get(self.pos + ahead).map(|&(_, c)| c)
    }

    fn advance(&mut self) {
        if let Some(&(_, c)) = self.chars.get(self.pos) {
            self.pos += 1;
            if c == '\n' {
                self.line += 1;
                self.col = 1;
            } else {
                self.col += 1;
            }
        }
    }

    fn offset_at(&self, pos: usize) -> usize {
        self.chars
            .get(pos)
            .map(|&(o, _)| o)
            .unwrap_or(self.source.text.len())
    }

    fn text_between(&self, start: usize, end: usize) -> String {
        self.chars[start..end].iter().map(|&(_, c)| c).collect()
    }

    /// Span from a char position to the current position. Start line/col are
    /// recomputed by rewinding columns on the current line, which is valid
    /// because tokens never span a newline except strings; those track
    /// line/col through `advance` and use the stored coordinates.
    fn span_from(&self, start: usize) -> Span {
        let start_offset = self.offset_at(start);
        let end_offset = self.offset_at(self.pos);
        let (start_line, start_col) = self.coords_at(start);
        Span::new(
            start_offset,
            end_offset,
            start_line,
            start_col,
            self.line,
            self.col,
        )
    }

    fn coords_at(&self, pos: usize) -> (u32, u32) {
        // Walk back from the current position to recover coordinates.
        let mut line = self.line;
        let mut col = self.col;
        let mut i = self.pos;
        while i > pos {
            i -= 1;
            let (_, c) = self.chars[i];
            if c == '\n' {
                line -= 1;
                // Recompute the column on the previous line.
                let mut j = i;
                let mut width: u32 = 1;
                while j > 0 && self.chars[j - 1].1 != '\n' {
                    j -= 1;
                    width += 1;
                }
                col = width;
            } else {
                col -= 1;
            }
        }
        (line, col)
    }

    fn emit(&mut self, kind: TokenKind, text: String, span: Span) {
        let trivia = std::mem::take(&mut self.pending_trivia);
        self.tokens.push(Token {
            kind,
            text,
            span,
            trivia,
        });
        self.tokens_on_physical_line = true;
        self.tokens_on_logical_line = true;
    }

    fn emit_synthetic(&mut self, kind: TokenKind) {
        let span = Span::point(self.offset_at(self.pos), self.line, self.col);
        let trivia = std::mem::take(&mut self.pending_trivia);
        self.tokens.push(Token {
            kind,
            text: String::new(),
            span,
            trivia,
        });
    }

    fn diag(&mut self, code: &'static str, span: Span, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic::new(
            code,
            Severity::Warning,
            self.source.module_id.clone(),
            span,
            message,
        ));
    }
}

fn cook_escape(esc: char, _lexer: &Lexer<'_>) -> String {
    match esc {
        'n' => "\n".to_string(),
        't' => "\t".to_string(),
        'r' => "\r".to_string(),
        '0' => "\0".to_string(),
        'a' => "\x07".to_string(),
        'b' => "\x08".to_string(),
        'f' => "\x0c".to_string(),
        'v' => "\x0b".to_string(),
        '\\' => "\\".to_string(),
        '\'' => "'".to_string(),
        '"' => "\"".to_string(),
        '\n' => String::new(),
        other => format!("\\{other}"),
    }
}

fn extract_coding(comment: &str) -> Option<String> {
    let idx = comment.find("coding")?;
    let rest = &comment[idx + "coding".len()..];
    let rest = rest.strip_prefix(':').or_else(|| rest.strip_prefix('='))?;
    let name: String = rest
        .trim_start()
        .chars()
        .take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        .collect();
    if name.is_empty() {
        None
    } else {
        Some(name)
    }
}
