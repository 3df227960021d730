//! Surface diffing properties: the four diff buckets partition the union of
//! both surfaces, identity diffs are all-unchanged, and lazy entries line up
//! with deferred import edges.

use std::collections::BTreeSet;

use proptest::prelude::*;

use pimpl_sentinel_core::graph::{parse_and_build, ImportKind};
use pimpl_sentinel_core::source::{ModuleId, SourceFile};
use pimpl_sentinel_core::surface::{
    diff_surfaces, extract_surface, surface_from_json, surface_to_json, ApiSurface, Binding,
    SymbolEntry,
};

fn arb_surface() -> impl Strategy<Value = ApiSurface> {
    let entry = (0usize..3, 0usize..6, 0usize..3, 0usize..3).prop_map(
        |(module, name, origin, origin_name)| {
            (
                format!("pkg{module}"),
                format!("name{name}"),
                format!("origin{origin}"),
                format!("sym{origin_name}"),
            )
        },
    );
    proptest::collection::vec(entry, 0..18).prop_map(|rows| {
        let mut surface = ApiSurface::default();
        for (module, name, origin, origin_name) in rows {
            let module_id = ModuleId::from_dotted(&module).unwrap();
            let entries = surface.modules.entry(module_id.clone()).or_default();
            if entries.iter().any(|e| e.public_name == name) {
                continue; // public names stay unique per module
            }
            entries.push(SymbolEntry {
                public_name: name,
                exposing_module: module_id,
                origin_module: ModuleId::from_dotted(&origin).unwrap(),
                origin_external: false,
                origin_name,
                binding: Binding::Reexport,
                curated: false,
            });
        }
        surface
    })
}

fn keys(surface: &ApiSurface) -> BTreeSet<(String, String)> {
    surface
        .modules
        .iter()
        .flat_map(|(module, entries)| {
            entries
                .iter()
                .map(move |e| (module.dotted(), e.public_name.clone()))
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn diff_buckets_partition_the_union(old in arb_surface(), new in arb_surface()) {
        let diff = diff_surfaces(&old, &new);
        let union: BTreeSet<(String, String)> =
            keys(&old).union(&keys(&new)).cloned().collect();
        let mut seen = BTreeSet::new();
        for entry in diff
            .added
            .iter()
            .chain(&diff.removed)
            .chain(&diff.origin_moved)
            .chain(&diff.unchanged)
        {
            let key = (entry.module.clone(), entry.name.clone());
            prop_assert!(seen.insert(key.clone()), "{key:?} appears twice");
            prop_assert!(union.contains(&key), "{key:?} outside the union");
        }
        prop_assert_eq!(seen.len(), union.len());
    }

    #[test]
    fn identity_diff_is_all_unchanged(surface in arb_surface()) {
        let diff = diff_surfaces(&surface, &surface);
        prop_assert!(diff.added.is_empty());
        prop_assert!(diff.removed.is_empty());
        prop_assert!(diff.origin_moved.is_empty());
        prop_assert_eq!(diff.unchanged.len(), keys(&surface).len());
    }

    #[test]
    fn serialization_round_trips(surface in arb_surface()) {
        let loaded = surface_from_json(&surface_to_json(&surface)).unwrap();
        let diff = diff_surfaces(&surface, &loaded);
        prop_assert!(diff.added.is_empty());
        prop_assert!(diff.removed.is_empty());
        prop_assert!(diff.origin_moved.is_empty());
    }
}

#[test]
fn lazy_entries_match_deferred_edges() {
    let lazy_init = "\
__all__ = [\"array\", \"read_image\"]

def __getattr__(name):
    if name == \"array\":
        from ._core import array
        return array
    if name == \"read_image\":
        from ._io import read_image
        return read_image
    raise AttributeError(name)
";
    let graph = parse_and_build(vec![
        SourceFile::new(
            "mylib/__init__.py",
            ModuleId::from_dotted("mylib").unwrap(),
            lazy_init,
        ),
        SourceFile::new(
            "mylib/_core.py",
            ModuleId::from_dotted("mylib._core").unwrap(),
            "def array(x):\n    return x\n",
        ),
        SourceFile::new(
            "mylib/_io.py",
            ModuleId::from_dotted("mylib._io").unwrap(),
            "def read_image(p):\n    return p\n",
        ),
    ]);
    let (surface, _) = extract_surface(&graph);
    for entries in surface.modules.values() {
        for entry in entries {
            if entry.binding != Binding::Lazy {
                continue;
            }
            let matched = graph.edges.iter().any(|edge| {
                edge.kind == ImportKind::Deferred
                    && edge.from == entry.exposing_module
                    && edge.to == entry.origin_module
            });
            assert!(
                matched,
                "lazy entry {} has no deferred edge {} -> {}",
                entry.public_name,
                entry.exposing_module.dotted(),
                entry.origin_module.dotted()
            );
        }
    }
}

#[test]
fn extraction_is_deterministic() {
    let files = || {
        vec![
            SourceFile::new(
                "pkg/__init__.py",
                ModuleId::from_dotted("pkg").unwrap(),
                "__all__ = [\"f\"]\n\nfrom ._core import f\n",
            ),
            SourceFile::new(
                "pkg/_core.py",
                ModuleId::from_dotted("pkg._core").unwrap(),
                "def f():\n    pass\n",
            ),
        ]
    };
    let (a, _) = extract_surface(&parse_and_build(files()));
    let (b, _) = extract_surface(&parse_and_build(files()));
    assert_eq!(a, b);
    assert_eq!(
        serde_json::to_string(&surface_to_json(&a)).unwrap(),
        serde_json::to_string(&surface_to_json(&b)).unwrap()
    );
}
