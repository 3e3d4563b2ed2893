use ndarray::{Array2, Axis};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{AttributedGraph, Attributes, Labels};
use crate::error::{Error, Result};

/// Parameters of the attributed stochastic block model fixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SbmConfig {
    pub nodes: usize,
    pub blocks: usize,
    pub p_in: f64,
    pub p_out: f64,
    pub attr_dim: usize,
    /// Standard deviation of the i.i.d. Gaussian noise added to every attribute.
    pub attr_noise: f64,
    /// Number of planted bridge nodes, each wired into every other block.
    #[serde(default)]
    pub bridges: usize,
    /// Links from each bridge node into each foreign block.
    #[serde(default = "default_bridge_links")]
    pub bridge_links: usize,
    pub seed: u64,
}

fn default_bridge_links() -> usize {
    3
}

impl Default for SbmConfig {
    fn default() -> Self {
        Self {
            nodes: 300,
            blocks: 3,
            p_in: 0.1,
            p_out: 0.01,
            attr_dim: 32,
            attr_noise: 0.1,
            bridges: 0,
            bridge_links: default_bridge_links(),
            seed: 0,
        }
    }
}

impl SbmConfig {
    /// Block of every node: contiguous ranges, the first `n % B` blocks one node larger.
    pub fn block_assignment(&self) -> Vec<usize> {
        let base = self.nodes / self.blocks;
        let extra = self.nodes % self.blocks;
        (0..self.blocks)
            .flat_map(|b| std::iter::repeat_n(b, base + usize::from(b < extra)))
            .collect()
    }

    fn validate(&self) -> Result<()> {
        if self.blocks == 0 || self.blocks > self.nodes {
            return Err(Error::Config(format!(
                "need 1 <= blocks <= nodes (got {} blocks, {} nodes)",
                self.blocks, self.nodes
            )));
        }
        if !(0.0 <= self.p_out && self.p_out < self.p_in && self.p_in <= 1.0) {
            return Err(Error::Config(format!(
                "need 0 <= p_out < p_in <= 1 (got p_in={}, p_out={})",
                self.p_in, self.p_out
            )));
        }
        if self.attr_dim == 0 || self.attr_noise.is_nan() || self.attr_noise < 0.0 {
            return Err(Error::Config(
                "attr_dim must be positive and attr_noise non-negative".into(),
            ));
        }
        if self.bridges > self.nodes {
            return Err(Error::Config("more bridge nodes than nodes".into()));
        }
        Ok(())
    }
}

/// Samples an undirected attributed SBM.
///
/// Attributes are the block's centroid (a fixed Gaussian random projection of the block's
/// one-hot vector) plus noise; the block id is stored as the node label. Bridge nodes keep
/// their home block as label but carry the mean of all centroids, a mixed membership.
pub fn generate_sbm(config: &SbmConfig) -> Result<AttributedGraph> {
    config.validate()?;
    let n = config.nodes;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let block = config.block_assignment();

    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            let p = if block[u] == block[v] {
                config.p_in
            } else {
                config.p_out
            };
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }

    let mut is_bridge = vec![false; n];
    if config.bridges > 0 && config.blocks > 1 {
        let members: Vec<Vec<usize>> = (0..config.blocks)
            .map(|b| (0..n).filter(|&v| block[v] == b).collect())
            .collect();
        for bridge in sample(&mut rng, n, config.bridges).into_vec() {
            is_bridge[bridge] = true;
            for (b, nodes) in members.iter().enumerate() {
                if b == block[bridge] {
                    continue;
                }
                let take = config.bridge_links.min(nodes.len());
                for idx in sample(&mut rng, nodes.len(), take) {
                    edges.push((bridge, nodes[idx]));
                }
            }
        }
    }

    let centroids = Array2::from_shape_fn((config.blocks, config.attr_dim), |_| {
        rng.sample::<f64, _>(StandardNormal)
    });
    let mixed = centroids.mean_axis(Axis(0)).expect("at least one block");
    let attrs = Array2::from_shape_fn((n, config.attr_dim), |(i, d)| {
        let noise: f64 = rng.sample(StandardNormal);
        let centre = if is_bridge[i] {
            mixed[d]
        } else {
            centroids[[block[i], d]]
        };
        centre + config.attr_noise * noise
    });

    let labels = Labels::new(
        block.iter().map(|&b| Some(b)).collect(),
        (0..config.blocks).map(|b| b.to_string()).collect(),
    )?;
    let (graph, _) = AttributedGraph::from_edges(n, false, edges)?;
    graph
        .with_attributes(Attributes::Dense(attrs))?
        .with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_limit_gives_disjoint_cliques() {
        let cfg = SbmConfig {
            nodes: 4,
            blocks: 2,
            p_in: 1.0,
            p_out: 0.0,
            attr_dim: 3,
            ..SbmConfig::default()
        };
        let g = generate_sbm(&cfg).unwrap();
        assert_eq!(g.edges(), vec![(0, 1), (2, 3)]);
        assert_eq!(
            g.labels().unwrap().classes(),
            &[Some(0), Some(0), Some(1), Some(1)]
        );
    }

    #[test]
    fn noiseless_attributes_identical_within_block() {
        let cfg = SbmConfig {
            nodes: 12,
            attr_noise: 0.0,
            ..SbmConfig::default()
        };
        let g = generate_sbm(&cfg).unwrap();
        let a = g.attributes().unwrap();
        assert_eq!(a.dense_row(0), a.dense_row(3));
        assert_eq!(a.dense_row(4), a.dense_row(7));
        assert_ne!(a.dense_row(0), a.dense_row(4));
    }

    #[test]
    fn edge_count_matches_expectation() {
        let g = generate_sbm(&SbmConfig {
            seed: 42,
            ..SbmConfig::default()
        })
        .unwrap();
        // 3 * C(100,2) * 0.1 intra + 3 * 100 * 100 * 0.01 inter.
        let mean = 3.0 * 4950.0 * 0.1 + 30_000.0 * 0.01;
        let var: f64 = 3.0 * 4950.0 * 0.1 * 0.9 + 30_000.0 * 0.01 * 0.99;
        let m = g.num_edges() as f64;
        assert!((m - mean).abs() < 4.0 * var.sqrt(), "{m} vs {mean}");
    }

    #[test]
    fn no_inter_block_edges_without_p_out() {
        let cfg = SbmConfig {
            p_out: 0.0,
            seed: 3,
            ..SbmConfig::default()
        };
        let g = generate_sbm(&cfg).unwrap();
        let block = cfg.block_assignment();
        assert!(g.edges().iter().all(|&(u, v)| block[u] == block[v]));
    }

    #[test]
    fn bridges_touch_every_block() {
        let cfg = SbmConfig {
            p_out: 0.0,
            bridges: 5,
            seed: 8,
            ..SbmConfig::default()
        };
        let g = generate_sbm(&cfg).unwrap();
        let block = cfg.block_assignment();
        let crossing = g
            .edges()
            .iter()
            .filter(|&&(u, v)| block[u] != block[v])
            .count();
        // Two bridges may pick each other, collapsing a pair into one edge.
        assert!(crossing > 20 && crossing <= 5 * 2 * 3, "{crossing}");
    }

    #[test]
    fn uneven_blocks_and_validation() {
        let cfg = SbmConfig {
            nodes: 7,
            blocks: 3,
            ..SbmConfig::default()
        };
        assert_eq!(cfg.block_assignment(), vec![0, 0, 0, 1, 1, 2, 2]);
        assert!(generate_sbm(&SbmConfig {
            p_in: 0.1,
            p_out: 0.2,
            ..SbmConfig::default()
        })
        .is_err());
    }
}
