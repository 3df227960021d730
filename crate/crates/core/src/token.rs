//! Lexical tokens with comment trivia.

use crate::source::Span;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Ident,
    Keyword,
    /// Cooked string value (escapes processed unless the literal was raw).
    Str(String),
    Number,
    Op,
    Newline,
    Indent,
    Dedent,
    EndMarker,
}

impl TokenKind {
    pub fn name(&self) -> &'static str {
        match self {
            TokenKind::Ident => "name",
            TokenKind::Keyword => "name",
            TokenKind::Str(_) => "string",
            TokenKind::Number => "number",
            TokenKind::Op => "op",
            TokenKind::Newline => "newline",
            TokenKind::Indent => "indent",
            TokenKind::Dedent => "dedent",
            TokenKind::EndMarker => "endmarker",
        }
    }
}

/// A comment preserved as trivia. `own_line` is true when the comment is the
/// first thing on its physical line; trailing comments carry suppression
/// markers for the line they follow.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comment {
    pub text: String,
    pub span: Span,
    pub own_line: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    /// Verbatim lexeme (identifier text, operator characters, raw literal).
    pub text: String,
    pub span: Span,
    /// Comments encountered since the previous token.
    pub trivia: Vec<Comment>,
}

impl Token {
    pub fn is_op(&self, op: &str) -> bool {
        self.kind == TokenKind::Op && self.text == op
    }

    pub fn is_keyword(&self, kw: &str) -> bool {
        self.kind == TokenKind::Keyword && self.text == kw
    }
}

pub const KEYWORDS: [&str; 35] = [
    "False", "None", "True", "and", "as", "assert", "async", "await", "break", "class",
    "continue", "def", "del", "elif", "else", "except", "finally", "for", "from", "global",
    "if", "import", "in", "is", "lambda", "nonlocal", "not", "or", "pass", "raise", "return",
    "try", "while", "with", "yield",
];

pub fn is_keyword(word: &str) -> bool {
    KEYWORDS.contains(&word)
}
