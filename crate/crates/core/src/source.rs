//! Source locations and module identity.

use std::fmt;
use std::path::PathBuf;

use serde::Serialize;

use crate::visibility::{classify_name, VisibilityClass};

/// A byte range plus 1-based line/column coordinates.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Span {
    pub start_offset: usize,
    pub end_offset: usize,
    pub start_line: u32,
    pub start_col: u32,
    pub end_line: u32,
    pub end_col: u32,
}

impl Span {
    pub fn new(
        start_offset: usize,
        end_offset: usize,
        start_line: u32,
        start_col: u32,
        end_line: u32,
        end_col: u32,
    ) -> Self {
        Span {
            start_offset,
            end_offset,
            start_line,
            start_col,
            end_line,
            end_col,
        }
    }

    /// Zero-width span at a point.
    pub fn point(offset: usize, line: u32, col: u32) -> Self {
        Span::new(offset, offset, line, col, line, col)
    }

    pub fn contains(&self, other: &Span) -> bool {
        self.start_offset <= other.start_offset && other.end_offset <= self.end_offset
    }

    /// Smallest span covering both inputs.
    pub fn cover(a: Span, b: Span) -> Span {
        let (start_offset, start_line, start_col) = if a.start_offset <= b.start_offset {
            (a.start_offset, a.start_line, a.start_col)
        } else {
            (b.start_offset, b.start_line, b.start_col)
        };
        let (end_offset, end_line, end_col) = if a.end_offset >= b.end_offset {
            (a.end_offset, a.end_line, a.end_col)
        } else {
            (b.end_offset, b.end_line, b.end_col)
        };
        Span::new(start_offset, end_offset, start_line, start_col, end_line, end_col)
    }
}

/// True for names usable as Python identifiers (ASCII letters, digits,
/// underscore, plus non-ASCII alphabetics).
pub fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c == '_' || c.is_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c == '_' || c.is_alphanumeric())
}

/// A dotted module path such as `mylib._core`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModuleId {
    components: Vec<String>,
}

impl ModuleId {
    /// Builds a module id, rejecting empty paths and non-identifier components.
    pub fn new<I, S>(components: I) -> Option<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let components: Vec<String> = components.into_iter().map(Into::into).collect();
        if components.is_empty() || !components.iter().all(|c| is_identifier(c)) {
            return None;
        }
        Some(ModuleId { components })
    }

    pub fn from_dotted(path: &str) -> Option<Self> {
        ModuleId::new(path.split('.'))
    }

    pub fn components(&self) -> &[String] {
        &self.components
    }

    pub fn dotted(&self) -> String {
        self.components.join(".")
    }

    /// A module path is private when any component is internal or mangled.
    pub fn is_private(&self) -> bool {
        self.components.iter().any(|c| {
            matches!(
                classify_name(c),
                VisibilityClass::Internal | VisibilityClass::Mangled
            )
        })
    }

    /// Components up to (excluding) the first private component. Everything
    /// under this prefix may legitimately reach the private parts below it.
    pub fn private_boundary_prefix(&self) -> &[String] {
        let idx = self
            .components
            .iter()
            .position(|c| {
                matches!(
                    classify_name(c),
                    VisibilityClass::Internal | VisibilityClass::Mangled
                )
            })
            .unwrap_or(self.components.len());
        &self.components[..idx]
    }

    pub fn is_within(&self, prefix: &[String]) -> bool {
        self.components.len() >= prefix.len() && &self.components[..prefix.len()] == prefix
    }

    pub fn parent(&self) -> Option<ModuleId> {
        if self.components.len() <= 1 {
            return None;
        }
        Some(ModuleId {
            components: self.components[..self.components.len() - 1].to_vec(),
        })
    }

    pub fn child(&self, name: &str) -> Option<ModuleId> {
        if !is_identifier(name) {
            return None;
        }
        let mut components = self.components.clone();
        components.push(name.to_string());
        Some(ModuleId { components })
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dotted())
    }
}

impl Serialize for ModuleId {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.dotted())
    }
}

/// One Python source file queued for analysis.
#[derive(Clone, Debug)]
pub struct SourceFile {
    /// Package-relative path, e.g. `mylib/_core.py`.
    pub path: PathBuf,
    pub text: String,
    pub module_id: ModuleId,
}

impl SourceFile {
    pub fn new(path: impl Into<PathBuf>, module_id: ModuleId, text: impl Into<String>) -> Self {
        SourceFile {
            path: path.into(),
            text: text.into(),
            module_id,
        }
    }

    /// Whether this file is a package `__init__` module.
    pub fn is_package(&self) -> bool {
        self.path
            .file_name()
            .map(|n| n == "__init__.py")
            .unwrap_or(false)
    }
}
