//! Uncertainty analyses: neighborhood diversity against variance, and latent dimensions
//! whose variance keeps growing once training overfits.

use std::collections::BTreeMap;

use serde_json::json;

use super::metrics::spearman;
use super::{EvaluationReport, Table};
use crate::energy::Embeddings;
use crate::error::{Error, Result};
use crate::graph::{bfs_distances, AttributedGraph};
use crate::train::TrainingTrace;

pub const DEFAULT_WINDOW: usize = 200;
pub const DEFAULT_SLOPE_THRESHOLD: f64 = 1e-3;

/// Number of distinct classes among labeled nodes within `p` hops of each node.
/// Unlabeled nodes get `None`.
pub fn neighborhood_diversity(graph: &AttributedGraph, p: usize) -> Result<Vec<Option<usize>>> {
    let labels = graph.require_labels()?;
    let mut seen = vec![usize::MAX; labels.num_classes()];
    let mut out = Vec::with_capacity(graph.num_nodes());
    for i in 0..graph.num_nodes() {
        if labels.get(i).is_none() {
            out.push(None);
            continue;
        }
        let mut count = 0;
        for (j, d) in bfs_distances(graph, i, Some(p)).into_iter().enumerate() {
            if j == i || d.is_none() {
                continue;
            }
            if let Some(c) = labels.get(j) {
                if seen[c] != i {
                    seen[c] = i;
                    count += 1;
                }
            }
        }
        out.push(Some(count));
    }
    Ok(out)
}

/// Mean per-node variance grouped by diversity, and the Spearman correlation between the two.
pub fn diversity_variance_report(
    emb: &Embeddings,
    diversity: &[Option<usize>],
) -> Result<EvaluationReport> {
    if diversity.len() != emb.len() {
        return Err(Error::Shape(format!(
            "{} diversities for {} embeddings",
            diversity.len(),
            emb.len()
        )));
    }
    let per_node = emb.mean_variance_per_node();
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut groups: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for (i, d) in diversity.iter().enumerate() {
        if let Some(d) = *d {
            xs.push(d as f64);
            ys.push(per_node[i]);
            let g = groups.entry(d).or_default();
            g.0 += 1;
            g.1 += per_node[i];
        }
    }
    let mut table = Table::new(&["diversity", "nodes", "mean_variance"]);
    for (d, (count, sum)) in groups {
        table.push(vec![d as f64, count as f64, sum / count as f64]);
    }
    let mut report = EvaluationReport::new("uncertainty", json!({ "nodes": xs.len() }));
    report
        .statistics
        .insert("spearman".into(), spearman(&xs, &ys));
    report.tables.insert("diversity".into(), table);
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatentDimensions {
    pub kept: Vec<usize>,
    /// Dimensions whose variance grows faster than the threshold.
    pub flagged: Vec<usize>,
    /// Normalized least-squares slope of each dimension over the window.
    pub slopes: Vec<f64>,
}

/// Flags dimensions whose mean variance keeps rising over the final `window` epochs.
///
/// The slope of a least-squares line through each dimension's series is divided by the
/// series mean, so the rule is invariant to rescaling the trace.
pub fn detect_latent_dimensions(
    trace: &TrainingTrace,
    window: usize,
    threshold: f64,
) -> Result<LatentDimensions> {
    let records = &trace.records;
    let past_best = records.len().saturating_sub(trace.best_epoch.unwrap_or(0));
    if window < 2 || past_best < window {
        return Err(Error::TraceTooShort(format!(
            "need {window} epochs after the best epoch, trace has {past_best}"
        )));
    }
    let tail = &records[records.len() - window..];
    let dims = tail[0].mean_variance.len();
    let w = window as f64;
    let t_mean = (w - 1.0) / 2.0;
    let t_ss: f64 = (0..window).map(|t| (t as f64 - t_mean).powi(2)).sum();
    let mut slopes = Vec::with_capacity(dims);
    let (mut kept, mut flagged) = (Vec::new(), Vec::new());
    for d in 0..dims {
        let series: Vec<f64> = tail.iter().map(|r| r.mean_variance[d]).collect();
        let mean = series.iter().sum::<f64>() / w;
        let cov: f64 = series
            .iter()
            .enumerate()
            .map(|(t, y)| (t as f64 - t_mean) * (y - mean))
            .sum();
        let slope = cov / t_ss / mean;
        slopes.push(slope);
        if slope > threshold {
            flagged.push(d);
        } else {
            kept.push(d);
        }
    }
    Ok(LatentDimensions {
        kept,
        flagged,
        slopes,
    })
}
