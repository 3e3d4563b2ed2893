use std::collections::HashSet;

use gaussembed::graph::{compute_all_hop_sets, greedy_edge_cover, hide_nodes, split_edges};
use gaussembed::AttributedGraph;
use proptest::prelude::*;

fn graph_strategy(directed: bool) -> impl Strategy<Value = AttributedGraph> {
    (2usize..30).prop_flat_map(move |n| {
        proptest::collection::vec((0..n, 0..n), 0..(3 * n))
            .prop_map(move |edges| AttributedGraph::from_edges(n, directed, edges).unwrap().0)
    })
}

/// All-pairs shortest paths along arcs; `usize::MAX` for unreachable.
fn floyd_warshall(g: &AttributedGraph) -> Vec<Vec<usize>> {
    let n = g.num_nodes();
    let mut d = vec![vec![usize::MAX; n]; n];
    for (u, row) in d.iter_mut().enumerate() {
        row[u] = 0;
        for &v in g.out_neighbors(u) {
            row[v] = 1;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] != usize::MAX && d[k][j] != usize::MAX && d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    d
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hop_sets_match_floyd_warshall(
        g in prop_oneof![graph_strategy(false), graph_strategy(true)],
        k in 1usize..5,
    ) {
        let d = floyd_warshall(&g);
        let hops = compute_all_hop_sets(&g, k).unwrap();
        for (i, h) in hops.iter().enumerate() {
            let mut seen = vec![false; g.num_nodes()];
            for (b, set) in h.sets().iter().enumerate() {
                for &j in set {
                    prop_assert!(!seen[j], "node {} in two buckets of anchor {}", j, i);
                    seen[j] = true;
                    prop_assert_eq!(d[i][j].min(k), b + 1);
                    prop_assert_eq!(h.hop_of(j), Some(b + 1));
                }
            }
            // The buckets partition V \ {i}.
            prop_assert!(!seen[i]);
            prop_assert_eq!(seen.iter().filter(|&&s| s).count(), g.num_nodes() - 1);
        }
    }

    #[test]
    fn edge_cover_touches_every_non_isolated_node(g in graph_strategy(false)) {
        let isolated = (0..g.num_nodes()).any(|v| g.out_neighbors(v).is_empty());
        match greedy_edge_cover(&g) {
            Ok(cover) => {
                prop_assert!(!isolated);
                let mut hit = vec![false; g.num_nodes()];
                for &(u, v) in &cover {
                    prop_assert!(g.has_edge(u, v));
                    hit[u] = true;
                    hit[v] = true;
                }
                prop_assert!(hit.iter().all(|&h| h));
                prop_assert!(cover.len() < g.num_nodes());
            }
            Err(_) => prop_assert!(isolated),
        }
    }

    #[test]
    fn split_partitions_edges_and_samples_true_non_edges(
        g in graph_strategy(false),
        cover: bool,
        seed: u64,
    ) {
        let Ok(split) = split_edges(&g, 0.1, 0.2, cover, seed) else {
            // Infeasible only through the cover or too few non-edges.
            let n = g.num_nodes();
            let m = g.num_edges();
            let held = (0.1 * m as f64).round() as usize + (0.2 * m as f64).round() as usize;
            prop_assert!(cover || n * (n - 1) / 2 - m < held);
            return Ok(());
        };
        let mut all: Vec<_> = split
            .train_edges
            .iter()
            .chain(&split.val_edges)
            .chain(&split.test_edges)
            .copied()
            .collect();
        all.sort_unstable();
        prop_assert_eq!(all, g.edges());
        prop_assert_eq!(split.val_non_edges.len(), split.val_edges.len());
        prop_assert_eq!(split.test_non_edges.len(), split.test_edges.len());
        let mut distinct = HashSet::new();
        for &(u, v) in split.val_non_edges.iter().chain(&split.test_non_edges) {
            prop_assert!(u != v && !g.has_edge(u, v));
            prop_assert!(distinct.insert((u, v)));
        }
        if cover {
            let train = split.train_graph(&g).unwrap();
            prop_assert!((0..g.num_nodes()).all(|v| !train.out_neighbors(v).is_empty()));
        }
    }

    #[test]
    fn split_is_deterministic(g in graph_strategy(false), seed: u64) {
        prop_assert_eq!(
            split_edges(&g, 0.2, 0.2, false, seed).ok(),
            split_edges(&g, 0.2, 0.2, false, seed).ok()
        );
    }

    #[test]
    fn hiding_removes_every_hidden_edge(g in graph_strategy(false), seed: u64) {
        prop_assume!(g.num_nodes() >= 5);
        let h = hide_nodes(&g, 0.2, seed).unwrap();
        let hidden: HashSet<usize> = h.hidden.iter().copied().collect();
        prop_assert_eq!(h.hidden.len() + h.visible.len(), g.num_nodes());
        prop_assert_eq!(h.train_graph.num_nodes(), h.visible.len());
        let kept = h.train_graph.num_edges();
        prop_assert_eq!(kept + h.held_out_edges.len(), g.num_edges());
        for &(u, v) in &h.held_out_edges {
            prop_assert!(hidden.contains(&u) || hidden.contains(&v));
        }
        for (a, b) in h.train_graph.edges() {
            prop_assert!(g.has_edge(h.visible[a], h.visible[b]));
        }
    }
}
