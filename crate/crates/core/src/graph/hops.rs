use std::collections::VecDeque;

use rand::Rng;

use super::AttributedGraph;
use crate::error::{Error, Result};

/// Partition of `V \ {anchor}` by truncated shortest-path distance.
///
/// Hop `k` (1-based) holds the nodes `j` with `min(sp(anchor, j), K) == k`. The sets for
/// `k < K` are stored explicitly; the last set (everything at distance `>= K`, including
/// unreachable nodes) is represented implicitly as the complement, since it is usually
/// most of the graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopNeighborhoods {
    anchor: usize,
    num_nodes: usize,
    max_hop: usize,
    near: Vec<Vec<usize>>,
    /// `anchor` plus every node in `near`, sorted.
    excluded: Vec<usize>,
}

impl HopNeighborhoods {
    pub fn anchor(&self) -> usize {
        self.anchor
    }

    pub fn max_hop(&self) -> usize {
        self.max_hop
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    /// `|N_ik|` for `k` in `1..=K`.
    pub fn cardinality(&self, k: usize) -> usize {
        assert!(
            k >= 1 && k <= self.max_hop,
            "hop {k} outside 1..={}",
            self.max_hop
        );
        if k < self.max_hop {
            self.near[k - 1].len()
        } else {
            self.num_nodes - self.excluded.len()
        }
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        (1..=self.max_hop).map(|k| self.cardinality(k)).collect()
    }

    /// Hops with at least one member, ascending.
    pub fn nonempty_hops(&self) -> Vec<usize> {
        (1..=self.max_hop)
            .filter(|&k| self.cardinality(k) > 0)
            .collect()
    }

    /// Members of hop `k`, sorted ascending.
    pub fn set(&self, k: usize) -> Vec<usize> {
        if k < self.max_hop {
            self.near[k - 1].clone()
        } else {
            let mut out = Vec::with_capacity(self.cardinality(k));
            let mut ex = self.excluded.iter().peekable();
            for j in 0..self.num_nodes {
                if ex.peek() == Some(&&j) {
                    ex.next();
                } else {
                    out.push(j);
                }
            }
            out
        }
    }

    pub fn sets(&self) -> Vec<Vec<usize>> {
        (1..=self.max_hop).map(|k| self.set(k)).collect()
    }

    /// The hop bucket of `j`, or `None` for the anchor itself.
    pub fn hop_of(&self, j: usize) -> Option<usize> {
        if j == self.anchor {
            return None;
        }
        for (k, set) in self.near.iter().enumerate() {
            if set.binary_search(&j).is_ok() {
                return Some(k + 1);
            }
        }
        Some(self.max_hop)
    }

    /// The `idx`-th member (ascending order) of hop `k`.
    pub fn nth_member(&self, k: usize, idx: usize) -> usize {
        if k < self.max_hop {
            return self.near[k - 1][idx];
        }
        debug_assert!(idx < self.cardinality(k));
        let mut x = idx;
        for &e in &self.excluded {
            if e <= x {
                x += 1;
            } else {
                break;
            }
        }
        x
    }

    /// A uniform draw from hop `k`, or `None` when it is empty.
    pub fn sample<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Option<usize> {
        let n = self.cardinality(k);
        (n > 0).then(|| self.nth_member(k, rng.random_range(0..n)))
    }
}

/// Breadth-first distances from `source` along out-edges, optionally stopping at `max_depth`.
/// Unreached nodes are `None`.
pub fn bfs_distances(
    graph: &AttributedGraph,
    source: usize,
    max_depth: Option<usize>,
) -> Vec<Option<usize>> {
    let mut dist = vec![None; graph.num_nodes()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let d = dist[u].unwrap();
        if max_depth.is_some_and(|m| d >= m) {
            continue;
        }
        for &v in graph.out_neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(d + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

struct Scratch {
    seen: Vec<u32>,
    stamp: u32,
    frontier: Vec<usize>,
    next: Vec<usize>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self {
            seen: vec![0; n],
            stamp: 0,
            frontier: Vec::new(),
            next: Vec::new(),
        }
    }

    fn run(&mut self, graph: &AttributedGraph, anchor: usize, max_hop: usize) -> HopNeighborhoods {
        self.stamp = self.stamp.wrapping_add(1);
        if self.stamp == 0 {
            self.seen.fill(0);
            self.stamp = 1;
        }
        let stamp = self.stamp;
        self.seen[anchor] = stamp;
        self.frontier.clear();
        self.frontier.push(anchor);
        let mut near = Vec::with_capacity(max_hop - 1);
        // Level-synchronous BFS to depth K-1; everything left falls into hop K.
        for _ in 1..max_hop {
            self.next.clear();
            for &u in &self.frontier {
                for &v in graph.out_neighbors(u) {
                    if self.seen[v] != stamp {
                        self.seen[v] = stamp;
                        self.next.push(v);
                    }
                }
            }
            let mut level = self.next.clone();
            level.sort_unstable();
            near.push(level);
            std::mem::swap(&mut self.frontier, &mut self.next);
        }
        let mut excluded: Vec<usize> = near.iter().flatten().copied().collect();
        excluded.push(anchor);
        excluded.sort_unstable();
        HopNeighborhoods {
            anchor,
            num_nodes: graph.num_nodes(),
            max_hop,
            near,
            excluded,
        }
    }
}

/// Hop sets of a single anchor. Directed graphs are traversed along out-edges.
pub fn compute_hop_sets(
    graph: &AttributedGraph,
    anchor: usize,
    max_hop: usize,
) -> Result<HopNeighborhoods> {
    if max_hop == 0 {
        return Err(Error::Config("maximum hop K must be at least 1".into()));
    }
    if anchor >= graph.num_nodes() {
        return Err(Error::OutOfBounds {
            what: "anchor",
            index: anchor,
            limit: graph.num_nodes(),
        });
    }
    Ok(Scratch::new(graph.num_nodes()).run(graph, anchor, max_hop))
}

/// Hop sets for every node, indexed by anchor.
pub fn compute_all_hop_sets(
    graph: &AttributedGraph,
    max_hop: usize,
) -> Result<Vec<HopNeighborhoods>> {
    if max_hop == 0 {
        return Err(Error::Config("maximum hop K must be at least 1".into()));
    }
    let mut scratch = Scratch::new(graph.num_nodes());
    Ok((0..graph.num_nodes())
        .map(|i| scratch.run(graph, i, max_hop))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn graph(n: usize, directed: bool, edges: &[(usize, usize)]) -> AttributedGraph {
        AttributedGraph::from_edges(n, directed, edges.iter().copied())
            .unwrap()
            .0
    }

    #[test]
    fn directed_path_from_source() {
        let g = graph(4, true, &[(0, 1), (1, 2), (2, 3)]);
        let h = compute_hop_sets(&g, 0, 2).unwrap();
        assert_eq!(h.sets(), vec![vec![1], vec![2, 3]]);
    }

    #[test]
    fn directed_path_from_sink_is_all_unreachable() {
        let g = graph(4, true, &[(0, 1), (1, 2), (2, 3)]);
        let h = compute_hop_sets(&g, 3, 2).unwrap();
        assert_eq!(h.sets(), vec![vec![], vec![0, 1, 2]]);
        assert_eq!(h.nonempty_hops(), vec![2]);
    }

    #[test]
    fn triangle_with_pendant() {
        let g = graph(4, false, &[(0, 1), (1, 2), (0, 2), (2, 3)]);
        let h = compute_hop_sets(&g, 0, 2).unwrap();
        assert_eq!(h.sets(), vec![vec![1, 2], vec![3]]);
        let h2 = compute_hop_sets(&g, 2, 2).unwrap();
        assert_eq!(h2.sets(), vec![vec![0, 1, 3], vec![]]);
    }

    #[test]
    fn k_equal_one_is_everything_else() {
        let g = graph(3, false, &[(0, 1)]);
        let h = compute_hop_sets(&g, 1, 1).unwrap();
        assert_eq!(h.sets(), vec![vec![0, 2]]);
    }

    #[test]
    fn errors() {
        let g = graph(2, false, &[(0, 1)]);
        assert!(matches!(
            compute_hop_sets(&g, 5, 2).unwrap_err(),
            Error::OutOfBounds { .. }
        ));
        assert!(matches!(
            compute_hop_sets(&g, 0, 0).unwrap_err(),
            Error::Config(_)
        ));
    }

    #[test]
    fn nth_member_walks_complement() {
        let g = graph(8, false, &[(3, 0), (3, 5), (5, 6)]);
        let h = compute_hop_sets(&g, 3, 3).unwrap();
        let far = h.set(3);
        assert_eq!(far, vec![1, 2, 4, 7]);
        for (i, &j) in far.iter().enumerate() {
            assert_eq!(h.nth_member(3, i), j);
        }
        assert_eq!(h.hop_of(6), Some(2));
        assert_eq!(h.hop_of(7), Some(3));
        assert_eq!(h.hop_of(3), None);
    }

    #[test]
    fn far_samples_cover_set_uniformly() {
        let g = graph(6, false, &[(0, 1)]);
        let h = compute_hop_sets(&g, 0, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut counts = [0usize; 6];
        for _ in 0..40_000 {
            counts[h.sample(2, &mut rng).unwrap()] += 1;
        }
        assert_eq!(counts[0] + counts[1], 0);
        for &c in &counts[2..] {
            assert!((c as f64 - 10_000.0).abs() < 400.0, "{counts:?}");
        }
    }
}
