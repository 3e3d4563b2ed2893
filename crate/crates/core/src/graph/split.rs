use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AttributedGraph;
use crate::error::{Error, Result};

/// Train/validation/test partition of a graph's edges, plus matching non-edge samples.
///
/// Undirected edges appear once, as `(min, max)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSplit {
    pub train_edges: Vec<(usize, usize)>,
    pub val_edges: Vec<(usize, usize)>,
    pub test_edges: Vec<(usize, usize)>,
    pub val_non_edges: Vec<(usize, usize)>,
    pub test_non_edges: Vec<(usize, usize)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_nodes: Option<Vec<usize>>,
}

impl DataSplit {
    /// The graph restricted to the training edges.
    pub fn train_graph(&self, graph: &AttributedGraph) -> Result<AttributedGraph> {
        graph.with_edges(&self.train_edges)
    }
}

/// Result of hiding a random node subset for inductive evaluation.
#[derive(Debug, Clone)]
pub struct HiddenNodeSplit {
    /// Subgraph induced by the visible nodes, relabeled `0..visible.len()`.
    pub train_graph: AttributedGraph,
    /// Original id of each training-graph node.
    pub visible: Vec<usize>,
    pub hidden: Vec<usize>,
    /// Every original edge with at least one hidden endpoint (original ids).
    pub held_out_edges: Vec<(usize, usize)>,
}

/// Greedy edge cover: a maximal matching (low-degree edges first) extended with one
/// incident edge for every node the matching missed.
pub fn greedy_edge_cover(graph: &AttributedGraph) -> Result<Vec<(usize, usize)>> {
    let n = graph.num_nodes();
    let edges = graph.edges();
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (e, &(u, v)) in edges.iter().enumerate() {
        incident[u].push(e);
        incident[v].push(e);
    }
    if let Some(v) = (0..n).find(|&v| incident[v].is_empty()) {
        return Err(Error::Infeasible(format!(
            "node {v} is isolated, no edge cover exists"
        )));
    }
    let deg = |v: usize| incident[v].len();
    let mut order: Vec<usize> = (0..edges.len()).collect();
    order.sort_by_key(|&e| {
        let (u, v) = edges[e];
        (deg(u).min(deg(v)), deg(u).max(deg(v)), u, v)
    });

    let mut covered = vec![false; n];
    let mut in_cover = vec![false; edges.len()];
    for &e in &order {
        let (u, v) = edges[e];
        if !covered[u] && !covered[v] {
            covered[u] = true;
            covered[v] = true;
            in_cover[e] = true;
        }
    }
    for v in 0..n {
        if covered[v] {
            continue;
        }
        let &e = incident[v]
            .iter()
            .min_by_key(|&&e| {
                let (a, b) = edges[e];
                deg(if a == v { b } else { a })
            })
            .expect("non-isolated");
        in_cover[e] = true;
        let (a, b) = edges[e];
        covered[a] = true;
        covered[b] = true;
    }
    Ok(edges
        .into_iter()
        .zip(in_cover)
        .filter_map(|(e, keep)| keep.then_some(e))
        .collect())
}

/// Splits edges into train/validation/test and samples equally many non-edges for the
/// held-out parts.
///
/// With `edge_cover`, a greedy edge cover is pinned to the training set so that every node
/// keeps at least one training edge.
pub fn split_edges(
    graph: &AttributedGraph,
    val_frac: f64,
    test_frac: f64,
    edge_cover: bool,
    seed: u64,
) -> Result<DataSplit> {
    if !(0.0..1.0).contains(&val_frac)
        || !(0.0..1.0).contains(&test_frac)
        || val_frac + test_frac >= 1.0
    {
        return Err(Error::Config(format!(
            "need 0 <= val, test and val + test < 1 (got {val_frac}, {test_frac})"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = graph.edges();
    let m = edges.len();
    let n_val = (val_frac * m as f64).round() as usize;
    let n_test = (test_frac * m as f64).round() as usize;

    let (mut train, mut rest) = if edge_cover {
        let cover = greedy_edge_cover(graph)?;
        if m - n_val - n_test < cover.len() {
            return Err(Error::Infeasible(format!(
                "train fraction too small for edge cover: {} train edges, cover needs {}",
                m - n_val - n_test,
                cover.len()
            )));
        }
        let pinned: HashSet<_> = cover.iter().copied().collect();
        let rest = edges.into_iter().filter(|e| !pinned.contains(e)).collect();
        (cover, rest)
    } else {
        (Vec::new(), edges)
    };
    rest.shuffle(&mut rng);
    let mut val: Vec<_> = rest.drain(..n_val).collect();
    let mut test: Vec<_> = rest.drain(..n_test).collect();
    train.extend(rest);
    train.sort_unstable();
    val.sort_unstable();
    test.sort_unstable();

    let val_non_edges = sample_non_edges_with(graph, n_val, &HashSet::new(), &mut rng)?;
    let exclude: HashSet<_> = val_non_edges.iter().copied().collect();
    let test_non_edges = sample_non_edges_with(graph, n_test, &exclude, &mut rng)?;

    Ok(DataSplit {
        train_edges: train,
        val_edges: val,
        test_edges: test,
        val_non_edges,
        test_non_edges,
        hidden_nodes: None,
    })
}

/// Uniformly samples `count` distinct node pairs that are neither edges, self-loops nor in
/// `exclude`. Pairs are ordered for directed graphs and `(min, max)` for undirected ones.
pub fn sample_non_edges(
    graph: &AttributedGraph,
    count: usize,
    exclude: &HashSet<(usize, usize)>,
    seed: u64,
) -> Result<Vec<(usize, usize)>> {
    sample_non_edges_with(graph, count, exclude, &mut ChaCha8Rng::seed_from_u64(seed))
}

pub(crate) fn sample_non_edges_with<R: Rng + ?Sized>(
    graph: &AttributedGraph,
    count: usize,
    exclude: &HashSet<(usize, usize)>,
    rng: &mut R,
) -> Result<Vec<(usize, usize)>> {
    sample_pairs_where(graph, count, exclude, rng, |_, _| true)
}

/// Non-edge sampling restricted to pairs accepted by `admit`.
pub(crate) fn sample_pairs_where<R: Rng + ?Sized>(
    graph: &AttributedGraph,
    count: usize,
    exclude: &HashSet<(usize, usize)>,
    rng: &mut R,
    admit: impl Fn(usize, usize) -> bool,
) -> Result<Vec<(usize, usize)>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let n = graph.num_nodes();
    let directed = graph.is_directed();
    let key = |u, v| graph.edge_key(u, v);
    let exclude: HashSet<(usize, usize)> = exclude.iter().map(|&(u, v)| key(u, v)).collect();
    let blocked = |(u, v): (usize, usize)| {
        u == v || graph.has_edge(u, v) || exclude.contains(&(u, v)) || !admit(u, v)
    };

    let total = if directed {
        n * n.saturating_sub(1)
    } else {
        n * n.saturating_sub(1) / 2
    };
    // Upper bound on what rejection sampling could find; exact counting below when it matters.
    let mut excluded_non_edges = HashSet::new();
    for &(u, v) in &exclude {
        if u < n && v < n {
            let k = (u, v);
            if k.0 != k.1 && !graph.has_edge(k.0, k.1) && admit(k.0, k.1) {
                excluded_non_edges.insert(k);
            }
        }
    }
    let rough_available = total - graph.num_edges() - excluded_non_edges.len();
    if count > rough_available {
        return Err(Error::Infeasible(format!(
            "requested {count} non-edges but only {rough_available} exist"
        )));
    }

    // Dense regime: enumerate the candidates and pick a random subset.
    if count * 4 > rough_available || total <= 4096 {
        let mut candidates = Vec::new();
        for u in 0..n {
            let lo = if directed { 0 } else { u + 1 };
            for v in lo..n {
                if !blocked((u, v)) {
                    candidates.push((u, v));
                }
            }
        }
        if count > candidates.len() {
            return Err(Error::Infeasible(format!(
                "requested {count} non-edges but only {} qualify",
                candidates.len()
            )));
        }
        let (chosen, _) = candidates.partial_shuffle(rng, count);
        return Ok(chosen.to_vec());
    }

    let mut seen = HashSet::with_capacity(count);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count {
        attempts += 1;
        if attempts > 1000 * count + 100_000 {
            return Err(Error::Infeasible(
                "non-edge rejection sampling did not terminate; too few admissible pairs".into(),
            ));
        }
        let u = rng.random_range(0..n);
        let v = rng.random_range(0..n);
        let pair = key(u, v);
        if blocked(pair) || !seen.insert(pair) {
            continue;
        }
        out.push(pair);
    }
    Ok(out)
}

/// Hides `max(1, floor(fraction * N))` random nodes from the structure.
pub fn hide_nodes(graph: &AttributedGraph, fraction: f64, seed: u64) -> Result<HiddenNodeSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config(format!(
            "hidden fraction must lie in (0, 1), got {fraction}"
        )));
    }
    let n = graph.num_nodes();
    let count = ((fraction * n as f64 + 1e-9).floor() as usize).max(1);
    if n < count + 2 {
        return Err(Error::Infeasible(format!(
            "hiding {count} of {n} nodes leaves fewer than 2 training nodes"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut hidden = order[..count].to_vec();
    let mut visible = order[count..].to_vec();
    hidden.sort_unstable();
    visible.sort_unstable();

    let mut is_hidden = vec![false; n];
    for &h in &hidden {
        is_hidden[h] = true;
    }
    let held_out_edges = graph
        .edges()
        .into_iter()
        .filter(|&(u, v)| is_hidden[u] || is_hidden[v])
        .collect();
    Ok(HiddenNodeSplit {
        train_graph: graph.induced_subgraph(&visible),
        visible,
        hidden,
        held_out_edges,
    })
}
