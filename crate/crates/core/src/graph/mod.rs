//! Attributed graphs, hop neighborhoods, data splits and synthetic fixtures.

mod attributes;
mod hops;
mod io;
mod sbm;
mod split;

pub use attributes::{Attributes, SparseRows};
pub use hops::{bfs_distances, compute_all_hop_sets, compute_hop_sets, HopNeighborhoods};
pub use io::{
    attribute_shape, load_attributes, load_edge_list, load_labels, write_attributes,
    write_edge_list, write_labels,
};
pub use sbm::{generate_sbm, SbmConfig};
pub(crate) use split::sample_pairs_where;
pub use split::{
    greedy_edge_cover, hide_nodes, sample_non_edges, split_edges, DataSplit, HiddenNodeSplit,
};

use crate::error::{Error, Result};

/// Counters for edges discarded while building a graph.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EdgeStats {
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Per-node class assignment. Unlabeled nodes hold `None`.
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    classes: Vec<Option<usize>>,
    names: Vec<String>,
}

impl Labels {
    pub fn new(classes: Vec<Option<usize>>, names: Vec<String>) -> Result<Self> {
        if let Some(c) = classes.iter().flatten().find(|&&c| c >= names.len()) {
            return Err(Error::OutOfBounds {
                what: "class id",
                index: *c,
                limit: names.len(),
            });
        }
        Ok(Self { classes, names })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.names.len()
    }

    pub fn get(&self, node: usize) -> Option<usize> {
        self.classes[node]
    }

    pub fn classes(&self) -> &[Option<usize>] {
        &self.classes
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn labeled_nodes(&self) -> Vec<usize> {
        (0..self.classes.len())
            .filter(|&i| self.classes[i].is_some())
            .collect()
    }

    fn select(&self, nodes: &[usize]) -> Self {
        Self {
            classes: nodes.iter().map(|&i| self.classes[i]).collect(),
            names: self.names.clone(),
        }
    }
}

/// A (possibly directed) graph with node attributes and optional labels.
///
/// Adjacency is kept as sorted out-neighbor lists without self-loops or duplicates.
/// Undirected graphs store both arc directions.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributedGraph {
    num_nodes: usize,
    directed: bool,
    out_edges: Vec<Vec<usize>>,
    attributes: Option<Attributes>,
    labels: Option<Labels>,
}

impl AttributedGraph {
    /// Builds the structure from arcs, dropping self-loops and duplicates.
    /// Undirected input is symmetrized; a pair listed in both directions counts one duplicate.
    pub fn from_edges(
        num_nodes: usize,
        directed: bool,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<(Self, EdgeStats)> {
        let mut stats = EdgeStats::default();
        let mut units = Vec::new();
        for (u, v) in edges {
            for x in [u, v] {
                if x >= num_nodes {
                    return Err(Error::OutOfBounds {
                        what: "node id",
                        index: x,
                        limit: num_nodes,
                    });
                }
            }
            if u == v {
                stats.self_loops += 1;
                continue;
            }
            units.push(if directed { (u, v) } else { canonical(u, v) });
        }
        let before = units.len();
        units.sort_unstable();
        units.dedup();
        stats.duplicates = before - units.len();

        let mut out_edges = vec![Vec::new(); num_nodes];
        for &(u, v) in &units {
            out_edges[u].push(v);
            if !directed {
                out_edges[v].push(u);
            }
        }
        for list in &mut out_edges {
            list.sort_unstable();
        }
        Ok((
            Self {
                num_nodes,
                directed,
                out_edges,
                attributes: None,
                labels: None,
            },
            stats,
        ))
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn out_neighbors(&self, u: usize) -> &[usize] {
        &self.out_edges[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out_edges[u].binary_search(&v).is_ok()
    }

    /// Number of stored arcs; twice the edge count for undirected graphs.
    pub fn num_arcs(&self) -> usize {
        self.out_edges.iter().map(Vec::len).sum()
    }

    /// Number of edge units: arcs when directed, unordered pairs when undirected.
    pub fn num_edges(&self) -> usize {
        if self.directed {
            self.num_arcs()
        } else {
            self.num_arcs() / 2
        }
    }

    /// Edge units in ascending order. Undirected edges are reported once as `(min, max)`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.num_edges());
        for (u, list) in self.out_edges.iter().enumerate() {
            for &v in list {
                if self.directed || u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Normalizes a pair to the form used by [`edges`](Self::edges).
    pub fn edge_key(&self, u: usize, v: usize) -> (usize, usize) {
        if self.directed {
            (u, v)
        } else {
            canonical(u, v)
        }
    }

    /// Number of edge units touching `u`, regardless of direction.
    pub fn incident_count(&self, u: usize) -> usize {
        if self.directed {
            self.out_edges[u].len()
                + self
                    .out_edges
                    .iter()
                    .filter(|l| l.binary_search(&u).is_ok())
                    .count()
        } else {
            self.out_edges[u].len()
        }
    }

    /// Same nodes, attributes and labels with a different edge set.
    pub fn with_edges(&self, edges: &[(usize, usize)]) -> Result<Self> {
        let (mut g, _) = Self::from_edges(self.num_nodes, self.directed, edges.iter().copied())?;
        g.attributes = self.attributes.clone();
        g.labels = self.labels.clone();
        Ok(g)
    }

    /// Undirected view of the structure (every arc gets its reverse).
    pub fn symmetrized(&self) -> Self {
        if !self.directed {
            return self.clone();
        }
        let (mut g, _) = Self::from_edges(self.num_nodes, false, self.edges())
            .expect("edges of a valid graph are in range");
        g.attributes = self.attributes.clone();
        g.labels = self.labels.clone();
        g
    }

    /// Subgraph induced by `nodes`, relabeled so that `nodes[i]` becomes node `i`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Self {
        let mut index = vec![usize::MAX; self.num_nodes];
        for (new, &old) in nodes.iter().enumerate() {
            index[old] = new;
        }
        let mut out_edges = vec![Vec::new(); nodes.len()];
        for (new, &old) in nodes.iter().enumerate() {
            out_edges[new] = self.out_edges[old]
                .iter()
                .filter(|&&v| index[v] != usize::MAX)
                .map(|&v| index[v])
                .collect();
            out_edges[new].sort_unstable();
        }
        Self {
            num_nodes: nodes.len(),
            directed: self.directed,
            out_edges,
            attributes: self.attributes.as_ref().map(|a| a.select_rows(nodes)),
            labels: self.labels.as_ref().map(|l| l.select(nodes)),
        }
    }

    pub fn attributes(&self) -> Option<&Attributes> {
        self.attributes.as_ref()
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    pub fn set_attributes(&mut self, attributes: Attributes) -> Result<()> {
        if attributes.nrows() != self.num_nodes {
            return Err(Error::Shape(format!(
                "attribute matrix has {} rows, graph has {} nodes",
                attributes.nrows(),
                self.num_nodes
            )));
        }
        self.attributes = Some(attributes);
        Ok(())
    }

    pub fn with_attributes(mut self, attributes: Attributes) -> Result<Self> {
        self.set_attributes(attributes)?;
        Ok(self)
    }

    /// Attaches the identity as attribute matrix (plain-graph mode).
    pub fn with_one_hot(self) -> Self {
        let n = self.num_nodes;
        self.with_attributes(Attributes::OneHot(n))
            .expect("one-hot matrix matches node count")
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        if labels.len() != self.num_nodes {
            return Err(Error::Shape(format!(
                "{} labels for {} nodes",
                labels.len(),
                self.num_nodes
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub(crate) fn require_attributes(&self) -> Result<&Attributes> {
        self.attributes.as_ref().ok_or_else(|| {
            Error::Config("graph has no attributes; load an attribute file or use one-hot".into())
        })
    }

    pub(crate) fn require_labels(&self) -> Result<&Labels> {
        self.labels
            .as_ref()
            .ok_or_else(|| Error::LabelsRequired("the graph carries no labels".into()))
    }
}

pub(crate) fn canonical(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}
