//! Link prediction, dimension pruning and the inductive protocol.

use std::collections::HashSet;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::metrics::{auc_scores, average_precision_scores, ScoredPairSet};
use super::{EvaluationReport, Table};
use crate::encoder::{embed_all, EncoderParameters};
use crate::energy::{energy, energy_restricted, Embeddings};
use crate::error::{Error, Result};
use crate::graph::{hide_nodes, sample_pairs_where, split_edges, AttributedGraph, DataSplit};
use crate::seed::derive_seed;
use crate::train::{train, TrainConfig, Validation};

/// Which held-out part of a split to score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitPart {
    Val,
    Test,
}

type Pairs<'a> = &'a [(usize, usize)];

impl SplitPart {
    /// `(edges, non_edges)` of this part.
    fn pairs(self, split: &DataSplit) -> (Pairs<'_>, Pairs<'_>) {
        match self {
            SplitPart::Val => (&split.val_edges, &split.val_non_edges),
            SplitPart::Test => (&split.test_edges, &split.test_non_edges),
        }
    }
}

impl FromStr for SplitPart {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "val" => Ok(SplitPart::Val),
            "test" => Ok(SplitPart::Test),
            other => Err(Error::Config(format!("unknown split part {other:?}"))),
        }
    }
}

/// Link score of `(u, v)`: `-E_uv` when directed, `-(E_uv + E_vu) / 2` otherwise.
pub fn score_pair(emb: &Embeddings, u: usize, v: usize, directed: bool) -> f64 {
    let (a, b) = (emb.get(u), emb.get(v));
    if directed {
        -energy(a, b)
    } else {
        -(energy(a, b) + energy(b, a)) / 2.0
    }
}

fn check_pairs(emb: &Embeddings, pairs: &[(usize, usize)]) -> Result<()> {
    let n = emb.len();
    match pairs.iter().flat_map(|&(u, v)| [u, v]).find(|&x| x >= n) {
        Some(x) => Err(Error::OutOfBounds {
            what: "pair node",
            index: x,
            limit: n,
        }),
        None => Ok(()),
    }
}

pub fn score_pairs(emb: &Embeddings, pairs: &[(usize, usize)], directed: bool) -> Result<Vec<f64>> {
    check_pairs(emb, pairs)?;
    Ok(pairs
        .iter()
        .map(|&(u, v)| score_pair(emb, u, v, directed))
        .collect())
}

/// Edges (label 1) followed by non-edges (label 0), scored.
pub fn scored_link_set(
    emb: &Embeddings,
    edges: &[(usize, usize)],
    non_edges: &[(usize, usize)],
    directed: bool,
) -> Result<ScoredPairSet> {
    let mut pairs = edges.to_vec();
    pairs.extend_from_slice(non_edges);
    let scores = score_pairs(emb, &pairs, directed)?;
    let mut labels = vec![true; edges.len()];
    labels.resize(pairs.len(), false);
    ScoredPairSet::new(pairs, scores, labels)
}

pub fn link_auc(
    emb: &Embeddings,
    edges: &[(usize, usize)],
    non_edges: &[(usize, usize)],
    directed: bool,
) -> Result<f64> {
    let set = scored_link_set(emb, edges, non_edges, directed)?;
    auc_scores(&set.scores, &set.labels)
}

fn link_report(
    protocol: &str,
    config: serde_json::Value,
    set: &ScoredPairSet,
    positives: usize,
) -> Result<EvaluationReport> {
    let mut report = EvaluationReport::new(protocol, config);
    report
        .metrics
        .insert("auc".into(), auc_scores(&set.scores, &set.labels)?);
    report.metrics.insert(
        "ap".into(),
        average_precision_scores(&set.scores, &set.labels)?,
    );
    report
        .statistics
        .insert("positives".into(), positives as f64);
    report
        .statistics
        .insert("negatives".into(), (set.len() - positives) as f64);
    Ok(report)
}

/// AUC and AP of held-out edges against the matching non-edges.
pub fn eval_link_prediction(
    params: &EncoderParameters,
    graph: &AttributedGraph,
    split: &DataSplit,
    part: SplitPart,
) -> Result<EvaluationReport> {
    let emb = embed_all(params, graph.require_attributes()?)?;
    let (edges, non_edges) = part.pairs(split);
    let set = scored_link_set(&emb, edges, non_edges, graph.is_directed())?;
    link_report(
        "link",
        json!({ "part": part, "directed": graph.is_directed() }),
        &set,
        edges.len(),
    )
}

/// Link AUC as dimensions are removed, most uncertain (largest mean variance) first.
///
/// Row `r` of the `curve` table scores with the `r` most uncertain dimensions dropped.
pub fn pruning_curve(
    params: &EncoderParameters,
    graph: &AttributedGraph,
    split: &DataSplit,
    part: SplitPart,
) -> Result<EvaluationReport> {
    let emb = embed_all(params, graph.require_attributes()?)?;
    let (edges, non_edges) = part.pairs(split);
    let mut pairs = edges.to_vec();
    pairs.extend_from_slice(non_edges);
    check_pairs(&emb, &pairs)?;
    let mut labels = vec![true; edges.len()];
    labels.resize(pairs.len(), false);

    let mean_var = emb.mean_variance_per_dim();
    let mut order: Vec<usize> = (0..emb.dim()).collect();
    order.sort_by(|&a, &b| mean_var[b].total_cmp(&mean_var[a]));

    let directed = graph.is_directed();
    let mut table = Table::new(&["removed", "dimension", "auc"]);
    for r in 0..emb.dim() {
        let mut kept = order[r..].to_vec();
        kept.sort_unstable();
        let scores: Vec<f64> = pairs
            .iter()
            .map(|&(u, v)| {
                let (a, b) = (emb.get(u), emb.get(v));
                if directed {
                    -energy_restricted(a, b, &kept)
                } else {
                    -(energy_restricted(a, b, &kept) + energy_restricted(b, a, &kept)) / 2.0
                }
            })
            .collect();
        let removed_dim = if r == 0 { -1.0 } else { order[r - 1] as f64 };
        table.push(vec![r as f64, removed_dim, auc_scores(&scores, &labels)?]);
    }
    let mut report = EvaluationReport::new(
        "pruning",
        json!({ "part": part, "removal_order": order, "directed": directed }),
    );
    report.metrics.insert("auc".into(), table.rows[0][2]);
    report.tables.insert("curve".into(), table);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InductiveConfig {
    /// Fraction of nodes hidden from training.
    pub hidden_fraction: f64,
    /// Fraction of visible edges held out for early stopping.
    pub val_frac: f64,
    pub train: TrainConfig,
}

/// Hides a node subset, trains on the rest and scores every edge touching a hidden node
/// against as many sampled non-edges touching a hidden node.
///
/// Hidden nodes are embedded from attributes alone; their edges never reach training.
pub fn eval_inductive(
    graph: &AttributedGraph,
    config: &InductiveConfig,
) -> Result<EvaluationReport> {
    let attrs = graph.require_attributes()?;
    let seed = config.train.seed;
    let held = hide_nodes(graph, config.hidden_fraction, derive_seed(seed, "hide", 0))?;

    let val_split = if config.train.early_stopping {
        Some(split_edges(
            &held.train_graph,
            config.val_frac,
            0.0,
            false,
            derive_seed(seed, "inductive-val", 0),
        )?)
    } else {
        None
    };
    let validation = val_split.as_ref().and_then(Validation::from_split);
    let train_graph = match &val_split {
        Some(s) => s.train_graph(&held.train_graph)?,
        None => held.train_graph.clone(),
    };
    let outcome = train(&train_graph, validation, &config.train)?;
    let emb = embed_all(&outcome.params, attrs)?;

    let mut is_hidden = vec![false; graph.num_nodes()];
    for &h in &held.hidden {
        is_hidden[h] = true;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, "inductive-neg", 0));
    let negatives = sample_pairs_where(
        graph,
        held.held_out_edges.len(),
        &HashSet::new(),
        &mut rng,
        |u, v| is_hidden[u] || is_hidden[v],
    )?;
    let set = scored_link_set(&emb, &held.held_out_edges, &negatives, graph.is_directed())?;
    let mut report = link_report(
        "inductive",
        json!({
            "hidden_fraction": config.hidden_fraction,
            "hidden_nodes": held.hidden.len(),
            "val_frac": config.val_frac,
            "best_epoch": outcome.trace.best_epoch,
        }),
        &set,
        held.held_out_edges.len(),
    )?;
    if let Some(a) = outcome.trace.best_val_auc {
        report.statistics.insert("val_auc".into(), a);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::GaussianEmbedding;

    fn emb() -> Embeddings {
        Embeddings::from_rows(&[
            GaussianEmbedding::new(vec![0.0, 0.0], vec![1.0, 2.0]),
            GaussianEmbedding::new(vec![0.3, -1.0], vec![0.5, 1.0]),
            GaussianEmbedding::new(vec![2.0, 1.0], vec![3.0, 0.2]),
        ])
    }

    #[test]
    fn undirected_scores_are_symmetric() {
        let e = emb();
        for (u, v) in [(0, 1), (1, 2), (0, 2)] {
            assert_eq!(score_pair(&e, u, v, false), score_pair(&e, v, u, false));
        }
        assert_ne!(score_pair(&e, 0, 1, true), score_pair(&e, 1, 0, true));
    }

    #[test]
    fn out_of_range_pair_rejected() {
        assert!(score_pairs(&emb(), &[(0, 3)], true).is_err());
    }

    #[test]
    fn pruning_first_row_matches_link_auc() {
        let g = AttributedGraph::from_edges(4, false, [(0, 1), (2, 3)])
            .unwrap()
            .0
            .with_one_hot();
        let params = EncoderParameters::init_xavier(4, &[5], 3, 9).unwrap();
        let split = DataSplit {
            train_edges: vec![],
            val_edges: vec![],
            test_edges: vec![(0, 1), (2, 3)],
            val_non_edges: vec![],
            test_non_edges: vec![(0, 2), (1, 3)],
            hidden_nodes: None,
        };
        let link = eval_link_prediction(&params, &g, &split, SplitPart::Test).unwrap();
        let curve = pruning_curve(&params, &g, &split, SplitPart::Test).unwrap();
        assert_eq!(link.metric("auc"), curve.metric("auc"));
        assert_eq!(curve.tables["curve"].rows.len(), 3);
    }
}
