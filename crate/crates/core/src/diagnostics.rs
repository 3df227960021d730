//! Findings shared by the parser, analyses, and lint rules.
//!
//! Every finding carries a rule code (`R###` for boundary rules, `P###` for
//! parse and infrastructure issues), a span, and a fingerprint that stays
//! stable across runs on identical input.

use std::fmt;

use serde::Serialize;

use crate::source::{ModuleId, Span};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
            Severity::Info => "info",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Rule and issue codes.
pub mod codes {
    pub const UNTERMINATED_STRING: &str = "P001";
    pub const INCONSISTENT_INDENT: &str = "P002";
    pub const UNSUPPORTED_SYNTAX: &str = "P003";
    pub const BAD_ENCODING: &str = "P004";
    pub const FILE_TOO_LARGE: &str = "P005";
    pub const UNREADABLE_FILE: &str = "P006";
    pub const MALFORMED_SUPPRESSION: &str = "P007";
    pub const UNRESOLVED_IMPORT: &str = "P008";
    pub const DYNAMIC_ALL: &str = "P009";
    pub const OPAQUE_LAZY_NAMESPACE: &str = "P010";
    pub const UNRESOLVED_ORIGIN: &str = "P011";
    pub const LAZY_DIRECT_CONFLICT: &str = "P012";
    pub const INVALID_MODULE_NAME: &str = "P013";
    pub const MISSING_INIT: &str = "P014";

    pub const EXTERNAL_IMPL_ACCESS: &str = "R001";
    pub const PRIVATE_MODULE_IMPORT: &str = "R002";
    pub const MANGLED_NAME_RELIANCE: &str = "R003";
    pub const EXPORT_DRIFT: &str = "R004";
    pub const IMPORT_CYCLE: &str = "R005";
    pub const EAGER_HEAVY_IMPORT: &str = "R006";
    pub const LOGIC_IN_INTERFACE: &str = "R007";

    pub const ALL_RULES: [&str; 7] = [
        EXTERNAL_IMPL_ACCESS,
        PRIVATE_MODULE_IMPORT,
        MANGLED_NAME_RELIANCE,
        EXPORT_DRIFT,
        IMPORT_CYCLE,
        EAGER_HEAVY_IMPORT,
        LOGIC_IN_INTERFACE,
    ];
}

/// A single finding with a stable fingerprint.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub code: &'static str,
    pub severity: Severity,
    pub module: ModuleId,
    pub span: Span,
    pub message: String,
    pub suggestion: Option<String>,
}

impl Diagnostic {
    pub fn new(
        code: &'static str,
        severity: Severity,
        module: ModuleId,
        span: Span,
        message: impl Into<String>,
    ) -> Self {
        Diagnostic {
            code,
            severity,
            module,
            span,
            message: message.into(),
            suggestion: None,
        }
    }

    pub fn with_suggestion(mut self, suggestion: impl Into<String>) -> Self {
        self.suggestion = Some(suggestion.into());
        self
    }

    /// Hash of (code, module, normalized span, message). Offsets are left out
    /// so editing unrelated bytes earlier in the file does not shift it; the
    /// line/column rectangle is what identifies a finding.
    pub fn fingerprint(&self) -> String {
        let normalized = format!(
            "{}|{}|{}:{}-{}:{}|{}",
            self.code,
            self.module.dotted(),
            self.span.start_line,
            self.span.start_col,
            self.span.end_line,
            self.span.end_col,
            self.message
        );
        format!("{:016x}", fnv1a64(normalized.as_bytes()))
    }

    /// Sort key: (module, span start, code).
    pub fn ordering_key(&self) -> (String, usize, &'static str) {
        (self.module.dotted(), self.span.start_offset, self.code)
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= u64::from(b);
        hash = hash.wrapping_mul(0x100_0000_01b3);
    }
    hash
}

pub fn sort_diagnostics(diagnostics: &mut [Diagnostic]) {
    diagnostics.sort_by(|a, b| a.ordering_key().cmp(&b.ordering_key()));
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Diagnostic {
        Diagnostic::new(
            codes::EXTERNAL_IMPL_ACCESS,
            Severity::Error,
            ModuleId::from_dotted("client").unwrap(),
            Span::new(10, 20, 2, 5, 2, 15),
            "access to internal attribute",
        )
    }

    #[test]
    fn fingerprint_is_stable_and_sensitive() {
        let a = sample();
        let b = sample();
        assert_eq!(a.fingerprint(), b.fingerprint());

        let mut c = sample();
        c.message.push('!');
        assert_ne!(a.fingerprint(), c.fingerprint());
    }

    #[test]
    fn fingerprint_ignores_byte_offsets() {
        let a = sample();
        let mut b = sample();
        b.span.start_offset += 100;
        b.span.end_offset += 100;
        assert_eq!(a.fingerprint(), b.fingerprint());
    }

    #[test]
    fn ordering_is_module_then_position_then_code() {
        let mut diags = vec![sample(), {
            let mut d = sample();
            d.code = codes::PRIVATE_MODULE_IMPORT;
            d.span.start_offset = 5;
            d
        }];
        sort_diagnostics(&mut diags);
        assert_eq!(diags[0].code, codes::PRIVATE_MODULE_IMPORT);
    }
}
