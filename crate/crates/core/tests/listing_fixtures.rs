//! Parser behavior over the canonical wrapper/messenger/lazy-namespace
//! fixtures: full-subset coverage, span discipline, determinism, and the
//! error-tolerance accounting invariant.

use std::fs;
use std::path::{Path, PathBuf};

use pimpl_sentinel_core::ast::{check_span_containment, NodeKind};
use pimpl_sentinel_core::lexer::tokenize;
use pimpl_sentinel_core::parser::{parse_module, ParsedModule};
use pimpl_sentinel_core::source::{ModuleId, SourceFile};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn parse_file(path: &Path) -> ParsedModule {
    let text = fs::read_to_string(path).expect("fixture readable");
    let stem = path.file_stem().unwrap().to_string_lossy().to_string();
    let module = if stem == "__init__" { "pkg".to_string() } else { stem };
    parse_module(SourceFile::new(
        path.to_path_buf(),
        ModuleId::from_dotted(&module).unwrap(),
        text,
    ))
}

fn corpus_files() -> Vec<PathBuf> {
    let mut files = Vec::new();
    let mut stack = vec![
        fixtures().join("listings"),
        fixtures().join("packages"),
        fixtures().join("star"),
    ];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).expect("fixture dir readable") {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else if path.extension().map(|e| e == "py").unwrap_or(false) {
                files.push(path);
            }
        }
    }
    files.sort();
    files
}

const LISTINGS: [&str; 5] = [
    "listings/widget.py",
    "listings/impl/_widget.py",
    "listings/messenger_interface.py",
    "listings/messenger.py",
    "listings/mylib/__init__.py",
];

#[test]
fn all_five_listings_parse_with_zero_unsupported_nodes() {
    for rel in LISTINGS {
        let parsed = parse_file(&fixtures().join(rel));
        assert_eq!(
            parsed.tree.count_kind(NodeKind::Unsupported),
            0,
            "{rel} should parse fully"
        );
        assert!(
            parsed.diagnostics.is_empty(),
            "{rel} should parse clean, got {:?}",
            parsed.diagnostics
        );
    }
}

#[test]
fn widget_implementation_listing_has_expected_structure() {
    let parsed = parse_file(&fixtures().join("listings/impl/_widget.py"));
    let class = parsed
        .tree
        .children
        .iter()
        .find(|s| s.kind == NodeKind::ClassDef)
        .expect("class present");
    assert_eq!(class.ident(), Some("_WidgetImpl"));
    let methods: Vec<&str> = class
        .class_body()
        .iter()
        .filter(|s| s.kind == NodeKind::FunctionDef)
        .map(|s| s.ident().unwrap())
        .collect();
    assert_eq!(methods, vec!["__init__", "start", "stop", "status"]);
}

#[test]
fn lazy_namespace_listing_has_expected_structure() {
    let parsed = parse_file(&fixtures().join("listings/mylib/__init__.py"));
    let assign = parsed
        .tree
        .children
        .iter()
        .find(|s| s.kind == NodeKind::Assign)
        .expect("__all__ assignment");
    let value = assign.assign_value().unwrap();
    assert_eq!(value.kind, NodeKind::ListLit);
    assert_eq!(value.children.len(), 2);
    assert!(value
        .children
        .iter()
        .all(|c| c.kind == NodeKind::StringLit));
    assert!(parsed
        .tree
        .children
        .iter()
        .any(|s| s.kind == NodeKind::FunctionDef && s.ident() == Some("__getattr__")));
}

#[test]
fn widget_listing_token_stream_contains_expected_identifiers() {
    let text = fs::read_to_string(fixtures().join("listings/widget.py")).unwrap();
    let out = tokenize(&SourceFile::new(
        "widget.py",
        ModuleId::from_dotted("widget").unwrap(),
        text,
    ));
    let idents: Vec<&str> = out
        .tokens
        .iter()
        .filter(|t| t.kind == pimpl_sentinel_core::token::TokenKind::Ident)
        .map(|t| t.text.as_str())
        .collect();
    for expected in ["Widget", "_impl", "start", "stop", "status"] {
        assert!(idents.contains(&expected), "missing identifier {expected}");
    }
}

#[test]
fn span_containment_holds_across_the_corpus() {
    for path in corpus_files() {
        let parsed = parse_file(&path);
        if let Err((parent, child)) = check_span_containment(&parsed.tree) {
            panic!("{}: {parent:?} does not contain {child:?}", path.display());
        }
        // Every span stays within the file.
        let len = parsed.file.text.len();
        parsed.tree.walk(&mut |node| {
            assert!(node.span.end_offset <= len, "{}", path.display());
            assert!(node.span.start_offset <= node.span.end_offset);
        });
    }
}

#[test]
fn parsing_is_deterministic_across_the_corpus() {
    for path in corpus_files() {
        let a = parse_file(&path);
        let b = parse_file(&path);
        assert_eq!(a.tree, b.tree, "{}", path.display());
        assert_eq!(a.diagnostics, b.diagnostics);
    }
}

/// Line-based top-level statement splitter, independent of the parser: a
/// statement starts on a column-0 content line that is not a continuation
/// (bracket depth, backslash, triple-quoted string, clause keyword, or the
/// def/class after decorators).
fn count_top_level_statements(text: &str) -> usize {
    let mut count = 0;
    let mut depth: i32 = 0;
    let mut continuation = false;
    let mut in_triple: Option<&str> = None;
    let mut pending_decorator = false;
    for line in text.lines() {
        let trimmed = line.trim_end();
        if let Some(quote) = in_triple {
            if trimmed.contains(quote) {
                in_triple = None;
            }
            continue;
        }
        let stripped = trimmed.trim_start();
        if stripped.is_empty() || stripped.starts_with('#') {
            continue;
        }
        let at_top = depth == 0 && !continuation && !line.starts_with(' ') && !line.starts_with('\t');
        if at_top {
            let clause = ["else", "elif", "except", "finally"]
                .iter()
                .any(|kw| stripped == *kw || stripped.starts_with(&format!("{kw}:")) || stripped.starts_with(&format!("{kw} ")));
            let is_decorator = stripped.starts_with('@');
            let is_def = stripped.starts_with("def ") || stripped.starts_with("class ");
            if !clause {
                if is_decorator {
                    if !pending_decorator {
                        count += 1;
                        pending_decorator = true;
                    }
                } else if is_def && pending_decorator {
                    pending_decorator = false;
                } else {
                    count += 1;
                    pending_decorator = false;
                }
            }
        }
        // Track simple lexical state for the next line.
        let mut chars = stripped.char_indices().peekable();
        let bytes = stripped.as_bytes();
        let mut in_str: Option<char> = None;
        while let Some((i, c)) = chars.next() {
            if let Some(q) = in_str {
                if c == '\\' {
                    chars.next();
                } else if c == q {
                    in_str = None;
                }
                continue;
            }
            match c {
                '#' => break,
                '"' | '\'' => {
                    let run = bytes[i..].iter().take_while(|&&b| b == c as u8).count();
                    if run >= 3 {
                        // Triple quote: opened (and maybe closed on this line).
                        let quote = if c == '"' { "\"\"\"" } else { "'''" };
                        let rest = &stripped[i + 3..];
                        if !rest.contains(quote) {
                            in_triple = Some(quote);
                            break;
                        }
                        for _ in 0..(2 + rest.find(quote).unwrap() + 2) {
                            chars.next();
                        }
                    } else {
                        in_str = Some(c);
                    }
                }
                '(' | '[' | '{' => depth += 1,
                ')' | ']' | '}' => depth -= 1,
                _ => {}
            }
        }
        continuation = in_triple.is_none() && trimmed.ends_with('\\');
    }
    count
}

#[test]
fn statement_accounting_matches_line_based_splitting() {
    for path in corpus_files() {
        let parsed = parse_file(&path);
        let expected = count_top_level_statements(&parsed.file.text);
        assert_eq!(
            parsed.tree.children.len(),
            expected,
            "top-level statement count drifted for {}",
            path.display()
        );
    }
}

#[test]
fn mixed_indent_token_kinds_match_the_reference_tokenizer() {
    let path = fixtures().join("oracle/mixed_indent.py");
    let text = fs::read_to_string(&path).unwrap();
    let out = tokenize(&SourceFile::new(
        path.clone(),
        ModuleId::from_dotted("mixed_indent").unwrap(),
        text,
    ));
    assert!(out.diagnostics.is_empty(), "{:?}", out.diagnostics);
    let kinds: Vec<String> = out.tokens.iter().map(|t| t.kind.name().to_string()).collect();
    let oracle: Vec<String> = serde_json::from_str(
        &fs::read_to_string(fixtures().join("oracle/mixed_indent_tokens.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(kinds, oracle);
    let indents = kinds.iter().filter(|k| *k == "indent").count();
    let dedents = kinds.iter().filter(|k| *k == "dedent").count();
    assert_eq!(indents, dedents);
}
