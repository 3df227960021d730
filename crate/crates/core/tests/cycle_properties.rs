//! Cycle-analysis properties on synthesized module sets: acyclic graphs
//! report nothing, any back edge creates a cycle, and the module-level
//! report is a subset of the all-edges report.

use proptest::prelude::*;

use pimpl_sentinel_core::graph::{find_cycles, parse_and_build, ImportKind, ModuleGraph};
use pimpl_sentinel_core::source::{ModuleId, SourceFile};

/// Builds a graph where module `m{i}` imports `m{j}` for each edge (i, j);
/// deferred edges are wrapped in a function body.
fn graph_from_edges(n: usize, edges: &[(usize, usize)], deferred: &[(usize, usize)]) -> ModuleGraph {
    let files = (0..n)
        .map(|i| {
            let mut text = String::new();
            for &(from, to) in edges {
                if from == i {
                    text.push_str(&format!("import m{to}\n"));
                }
            }
            for &(from, to) in deferred {
                if from == i {
                    text.push_str(&format!(
                        "def load_{to}():\n    import m{to}\n    return m{to}\n"
                    ));
                }
            }
            SourceFile::new(
                format!("m{i}.py"),
                ModuleId::from_dotted(&format!("m{i}")).unwrap(),
                text,
            )
        })
        .collect();
    parse_and_build(files)
}

fn arb_dag_edges(max_nodes: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (2..=max_nodes).prop_flat_map(|n| {
        let all_forward: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect();
        proptest::sample::subsequence(all_forward, 0..=(n * (n - 1) / 2))
            .prop_map(move |edges| (n, edges))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Edges that only point forward in a topological order never cycle.
    #[test]
    fn dags_report_no_cycles((n, edges) in arb_dag_edges(12)) {
        let graph = graph_from_edges(n, &edges, &[]);
        prop_assert!(find_cycles(&graph, false).is_empty());
        prop_assert!(find_cycles(&graph, true).is_empty());
    }

    /// Adding a back edge along any existing path closes at least one cycle.
    #[test]
    fn any_back_edge_creates_a_cycle(
        (n, mut edges) in arb_dag_edges(12).prop_filter("needs an edge", |(_, e)| !e.is_empty()),
        pick in any::<prop::sample::Index>(),
    ) {
        let (from, to) = edges[pick.index(edges.len())];
        edges.push((to, from));
        let graph = graph_from_edges(n, &edges, &[]);
        let cycles = find_cycles(&graph, false);
        prop_assert!(!cycles.is_empty());
        // The two endpoints of the back edge share a component.
        let a = ModuleId::from_dotted(&format!("m{from}")).unwrap();
        let b = ModuleId::from_dotted(&format!("m{to}")).unwrap();
        prop_assert!(cycles.iter().any(|c| c.contains(&a) && c.contains(&b)));
    }

    /// Module-level cycles are a subset of all-imports cycles.
    #[test]
    fn module_level_report_is_a_subset(
        (n, edges) in arb_dag_edges(8),
        extra in proptest::collection::vec((0usize..8, 0usize..8), 0..6),
    ) {
        let eager: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .chain(extra.iter().copied().filter(|(a, b)| *a < n && *b < n && a != b))
            .collect();
        // Split the edge set: odd-indexed edges become deferred.
        let (eager_half, deferred_half): (Vec<_>, Vec<_>) = eager
            .iter()
            .enumerate()
            .partition(|(i, _)| i % 2 == 0);
        let eager_half: Vec<(usize, usize)> = eager_half.into_iter().map(|(_, e)| *e).collect();
        let deferred_half: Vec<(usize, usize)> = deferred_half.into_iter().map(|(_, e)| *e).collect();
        let graph = graph_from_edges(n.max(8), &eager_half, &deferred_half);
        let strict = find_cycles(&graph, false);
        let relaxed = find_cycles(&graph, true);
        // Every strictly-eager SCC is contained in some relaxed SCC.
        for cycle in &strict {
            prop_assert!(
                relaxed.iter().any(|big| cycle.iter().all(|m| big.contains(m))),
                "module-level cycle {cycle:?} missing from the relaxed report"
            );
        }
    }
}

#[test]
fn module_level_edges_sit_at_top_nesting_depth() {
    let graph = graph_from_edges(4, &[(0, 1), (1, 2)], &[(2, 3), (3, 0)]);
    for edge in &graph.edges {
        match edge.kind {
            ImportKind::ModuleLevel => {
                // The statement starts at column 1 of its line: nesting depth 0.
                assert_eq!(edge.span.start_col, 1, "edge {edge:?}");
            }
            ImportKind::Deferred | ImportKind::Conditional => {
                assert!(edge.span.start_col > 1, "edge {edge:?}");
            }
        }
    }
}
