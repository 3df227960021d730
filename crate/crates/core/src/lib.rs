//! Static analysis and scaffolding for interface/implementation boundaries
//! in Python packages.
//!
//! The crate parses a Python subset into span-annotated trees, models the
//! language's visibility conventions, builds import graphs, extracts curated
//! API surfaces, detects delegation-based wrapper patterns, lints boundary
//! violations, and generates refactoring scaffolds.

pub mod ast;
pub mod detect;
pub mod diagnostics;
pub mod lexer;
pub mod lint;
pub mod parser;
pub mod pipeline;
pub mod scaffold;
pub mod source;
pub mod surface;
pub mod token;
pub mod graph;
pub mod visibility;
