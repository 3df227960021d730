//! Mangling and wildcard-import semantics pinned against tables generated
//! with a reference interpreter (see tools/gen_oracles.py).

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use proptest::prelude::*;
use serde_json::Value;

use pimpl_sentinel_core::parser::parse_module;
use pimpl_sentinel_core::source::{ModuleId, SourceFile};
use pimpl_sentinel_core::visibility::{
    classify_name, demangle, exported_names, mangle, star_import_set, ExportProvenance,
    VisibilityClass,
};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn mangle_rows() -> Vec<(String, String, String)> {
    let raw = fs::read_to_string(fixtures().join("oracle/mangle_oracle.json")).unwrap();
    let rows: Vec<Value> = serde_json::from_str(&raw).unwrap();
    rows.iter()
        .map(|row| {
            (
                row["class"].as_str().unwrap().to_string(),
                row["attr"].as_str().unwrap().to_string(),
                row["key"].as_str().unwrap().to_string(),
            )
        })
        .collect()
}

#[test]
fn mangle_matches_the_interpreter_table() {
    let rows = mangle_rows();
    assert!(rows.len() >= 100, "table should cover at least 100 pairs");
    for (class, attr, key) in &rows {
        assert_eq!(
            &mangle(class, attr),
            key,
            "mangle({class:?}, {attr:?}) disagrees with the interpreter"
        );
    }
}

#[test]
fn demangle_inverts_every_mangled_table_row() {
    for (class, attr, key) in mangle_rows() {
        if key == attr {
            continue; // not mangled (dunder-exempt or underscore-only class)
        }
        let (dclass, dattr) = demangle(&key)
            .unwrap_or_else(|| panic!("demangle({key:?}) should produce a split"));
        assert_eq!(
            mangle(&dclass, &dattr),
            key,
            "demangle({key:?}) is not a right inverse"
        );
        // Unambiguous class names round-trip exactly: no leading underscore
        // (stripped before mangling), no trailing underscore (merges into
        // the attribute's prefix), no inner double underscore.
        let stripped = class.trim_start_matches('_');
        if class == stripped && !stripped.contains("__") && !stripped.ends_with('_') {
            assert_eq!((dclass.as_str(), dattr.as_str()), (class.as_str(), attr.as_str()));
        }
    }
}

proptest! {
    /// demangle . mangle is the identity on canonically-shaped pairs.
    #[test]
    fn demangle_roundtrips_mangle(
        class in "[A-Z][a-zA-Z0-9]{0,8}(_[a-zA-Z0-9]{1,4}){0,2}",
        attr_body in "[a-z][a-z0-9_]{0,8}[a-z0-9]",
    ) {
        let attr = format!("__{attr_body}");
        prop_assume!(classify_name(&attr) == VisibilityClass::Mangled);
        prop_assume!(!class.contains("__"));
        let mangled = mangle(&class, &attr);
        prop_assert_eq!(demangle(&mangled), Some((class, attr)));
    }

    #[test]
    fn classification_is_total_over_identifiers(name in "[A-Za-z_][A-Za-z0-9_]{0,12}") {
        let class = classify_name(&name);
        prop_assert_eq!(class, classify_name(&name));
        let _ = class; // every identifier lands in exactly one class
    }
}

fn parse_star_fixture(module: &str) -> pimpl_sentinel_core::ast::SyntaxNode {
    let path = if module == "mylib" {
        fixtures().join("star/mylib/__init__.py")
    } else {
        fixtures().join(format!("star/{module}.py"))
    };
    let text = fs::read_to_string(&path).unwrap();
    parse_module(SourceFile::new(
        path,
        ModuleId::from_dotted(module).unwrap(),
        text,
    ))
    .tree
}

#[test]
fn star_import_sets_match_the_interpreter() {
    let raw = fs::read_to_string(fixtures().join("oracle/star_oracle.json")).unwrap();
    let table: Value = serde_json::from_str(&raw).unwrap();
    let table = table.as_object().unwrap();
    assert_eq!(table.len(), 10, "ten wildcard-import fixtures");
    for (module, names) in table {
        let expected: BTreeSet<String> = names
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_str().unwrap().to_string())
            .collect();
        let tree = parse_star_fixture(module);
        let actual = star_import_set(&tree);
        assert_eq!(actual, expected, "wildcard set for {module} drifted");
    }
}

#[test]
fn curated_underscore_names_are_exported() {
    // m2 lists `_raw_handle` in __all__; the wildcard set must include it.
    let tree = parse_star_fixture("m2");
    let set = star_import_set(&tree);
    assert!(set.contains("_raw_handle"));
    let exported = exported_names(&tree);
    assert_eq!(exported.provenance, ExportProvenance::Curated);
}

#[test]
fn concatenation_bound_all_is_undecidable() {
    let text = "\
_base = [\"a\"]
__all__ = _base + [\"b\"]

def a():
    pass

def b():
    pass
";
    let tree = parse_module(SourceFile::new(
        "m.py",
        ModuleId::from_dotted("m").unwrap(),
        text,
    ))
    .tree;
    let exported = exported_names(&tree);
    assert_eq!(exported.provenance, ExportProvenance::Undecidable);
    // Falls back to the implicit public set, enumerated by hand.
    assert_eq!(exported.names, vec!["a".to_string(), "b".to_string()]);
}

#[test]
fn all_mutation_and_disagreeing_branches_are_undecidable() {
    let mutated = "\
__all__ = [\"a\"]
__all__.append(\"b\")

def a():
    pass
";
    let tree = parse_module(SourceFile::new(
        "m.py",
        ModuleId::from_dotted("m").unwrap(),
        mutated,
    ))
    .tree;
    assert_eq!(
        exported_names(&tree).provenance,
        ExportProvenance::Undecidable
    );

    let disagreeing = "\
if True:
    __all__ = [\"a\"]
else:
    __all__ = [\"b\"]
";
    let tree = parse_module(SourceFile::new(
        "m.py",
        ModuleId::from_dotted("m").unwrap(),
        disagreeing,
    ))
    .tree;
    assert_eq!(
        exported_names(&tree).provenance,
        ExportProvenance::Undecidable
    );

    let incomplete = "\
if True:
    __all__ = [\"a\"]
";
    let tree = parse_module(SourceFile::new(
        "m.py",
        ModuleId::from_dotted("m").unwrap(),
        incomplete,
    ))
    .tree;
    assert_eq!(
        exported_names(&tree).provenance,
        ExportProvenance::Undecidable
    );
}

#[test]
fn empty_module_exports_nothing_implicitly() {
    let tree = parse_module(SourceFile::new(
        "m.py",
        ModuleId::from_dotted("m").unwrap(),
        "",
    ))
    .tree;
    let exported = exported_names(&tree);
    assert_eq!(exported.provenance, ExportProvenance::Implicit);
    assert!(exported.names.is_empty());
    assert!(star_import_set(&tree).is_empty());
}

#[test]
fn star_set_without_curation_contains_no_internal_names() {
    for module in ["m1", "m4", "m5", "m8", "m9"] {
        let tree = parse_star_fixture(module);
        let set = star_import_set(&tree);
        for name in &set {
            assert_eq!(
                classify_name(name),
                VisibilityClass::Public,
                "{module} leaked {name}"
            );
        }
    }
}
