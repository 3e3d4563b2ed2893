//! Ranking metrics and rank correlation.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Candidate pairs with a score each and a binary ground truth (`true` = edge).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPairSet {
    pub pairs: Vec<(usize, usize)>,
    pub scores: Vec<f64>,
    pub labels: Vec<bool>,
}

impl ScoredPairSet {
    pub fn new(pairs: Vec<(usize, usize)>, scores: Vec<f64>, labels: Vec<bool>) -> Result<Self> {
        if pairs.len() != scores.len() || pairs.len() != labels.len() {
            return Err(Error::Shape(format!(
                "{} pairs, {} scores, {} labels",
                pairs.len(),
                scores.len(),
                labels.len()
            )));
        }
        Ok(Self {
            pairs,
            scores,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }
}

fn check_finite(scores: &[f64]) -> Result<()> {
    match scores.iter().find(|s| s.is_nan()) {
        Some(_) => Err(Error::NonFinite("NaN score".into())),
        None => Ok(()),
    }
}

/// Area under the ROC curve as the Mann-Whitney statistic, ties counting one half.
///
/// Counts are kept in integers (doubled to absorb the halves), so the result is the exact
/// fraction rounded once.
pub fn auc(set: &ScoredPairSet) -> Result<f64> {
    auc_scores(&set.scores, &set.labels)
}

pub fn auc_scores(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_finite(scores)?;
    let pos = labels.iter().filter(|&&l| l).count() as u128;
    let neg = labels.len() as u128 - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::UndefinedMetric(
            "AUC needs at least one positive and one negative".into(),
        ));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let mut twice_wins: u128 = 0;
    let mut neg_below: u128 = 0;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        let (mut p, mut q) = (0u128, 0u128);
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            if labels[order[j]] {
                p += 1;
            } else {
                q += 1;
            }
            j += 1;
        }
        twice_wins += 2 * p * neg_below + p * q;
        neg_below += q;
        i = j;
    }
    Ok(twice_wins as f64 / (2 * pos * neg) as f64)
}

/// Mean precision at the rank of each positive, scores sorted descending. Tied scores keep
/// their input order.
pub fn average_precision(set: &ScoredPairSet) -> Result<f64> {
    average_precision_scores(&set.scores, &set.labels)
}

pub fn average_precision_scores(scores: &[f64], labels: &[bool]) -> Result<f64> {
    check_finite(scores)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap_or(Ordering::Equal));
    let mut hits = 0usize;
    let mut sum = 0.0;
    for (rank, &idx) in order.iter().enumerate() {
        if labels[idx] {
            hits += 1;
            sum += hits as f64 / (rank + 1) as f64;
        }
    }
    if hits == 0 {
        return Err(Error::UndefinedMetric(
            "average precision needs at least one positive".into(),
        ));
    }
    Ok(sum / hits as f64)
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && values[order[j]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j + 1) as f64 / 2.0;
        for &idx in &order[i..j] {
            out[idx] = r;
        }
        i = j;
    }
    out
}

pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        0.0
    } else {
        sxy / (sxx * syy).sqrt()
    }
}

/// Spearman rank correlation with average ranks for ties; 0 when either side is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    pearson(&ranks(x), &ranks(y))
}
