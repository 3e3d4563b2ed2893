//! Metrics and the evaluation protocols: link prediction, node classification, uncertainty
//! analysis and inductive inference.

mod classify;
mod link;
mod logreg;
mod metrics;
mod uncertainty;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use classify::{eval_classification, ClassificationConfig};
pub use link::{
    eval_inductive, eval_link_prediction, link_auc, pruning_curve, score_pair, score_pairs,
    scored_link_set, InductiveConfig, SplitPart,
};
pub use logreg::{fit_logistic_regression, select_l2_by_cv, LogisticModel, L2_GRID};
pub use metrics::{
    auc, auc_scores, average_precision, average_precision_scores, pearson, ranks, spearman,
    ScoredPairSet,
};
pub use uncertainty::{
    detect_latent_dimensions, diversity_variance_report, neighborhood_diversity, LatentDimensions,
    DEFAULT_SLOPE_THRESHOLD, DEFAULT_WINDOW,
};

/// A rectangular numeric table, serialized as column names plus rows.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Comma-separated rendering with a header line.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Structured output of a protocol.
///
/// `metrics` holds rates in `[0, 1]` (AUC, AP, accuracy, F1); unbounded scalars such as
/// correlations or counts go to `statistics`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub protocol: String,
    pub config: serde_json::Value,
    pub metrics: BTreeMap<String, f64>,
    #[serde(default)]
    pub statistics: BTreeMap<String, f64>,
    #[serde(default)]
    pub tables: BTreeMap<String, Table>,
}

impl EvaluationReport {
    pub fn new(protocol: &str, config: serde_json::Value) -> Self {
        Self {
            protocol: protocol.to_string(),
            config,
            metrics: BTreeMap::new(),
            statistics: BTreeMap::new(),
            tables: BTreeMap::new(),
        }
    }

    pub fn metric(&self, name: &str) -> Option<f64> {
        self.metrics.get(name).copied()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports contain only serializable values")
    }
}
