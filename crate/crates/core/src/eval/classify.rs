//! Node classification from embeddings with a logistic-regression probe.

use ndarray::{Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::logreg::{accuracy, fit_logistic_regression, macro_f1, select_l2_by_cv, L2_GRID};
use super::{EvaluationReport, Table};
use crate::energy::Embeddings;
use crate::error::{Error, Result};
use crate::graph::Labels;
use crate::seed::derive_seed;

const MAX_RESAMPLES: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationConfig {
    /// Fractions of the labeled nodes used for training the probe.
    pub train_fractions: Vec<f64>,
    pub n_trials: usize,
    pub seed: u64,
    /// Append log-variances to the mean vectors as features.
    pub include_log_var: bool,
    /// Pick the L2 strength by 3-fold cross-validation; otherwise use `l2`.
    pub cross_validate: bool,
    pub l2: f64,
    pub max_iters: usize,
}

impl Default for ClassificationConfig {
    fn default() -> Self {
        Self {
            train_fractions: vec![0.1],
            n_trials: 10,
            seed: 0,
            include_log_var: false,
            cross_validate: true,
            l2: 1e-2,
            max_iters: 300,
        }
    }
}

/// Node features: mean vectors, optionally followed by log-variances.
pub fn embedding_features(emb: &Embeddings, include_log_var: bool) -> Array2<f64> {
    if include_log_var {
        let logs = emb.var.mapv(f64::ln);
        ndarray::concatenate(Axis(1), &[emb.mu.view(), logs.view()]).expect("row counts agree")
    } else {
        emb.mu.clone()
    }
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, v.sqrt())
}

/// Accuracy and macro-F1 of a probe trained on random fractions of the labeled nodes,
/// averaged over trials. Embeddings are expected to come from unsupervised training on the
/// full graph.
pub fn eval_classification(
    emb: &Embeddings,
    labels: &Labels,
    config: &ClassificationConfig,
) -> Result<EvaluationReport> {
    if labels.len() != emb.len() {
        return Err(Error::Shape(format!(
            "{} labels for {} embeddings",
            labels.len(),
            emb.len()
        )));
    }
    if config.n_trials == 0 || config.train_fractions.is_empty() {
        return Err(Error::Config(
            "need at least one trial and one fraction".into(),
        ));
    }
    let features = embedding_features(emb, config.include_log_var);
    let labeled = labels.labeled_nodes();
    let class_of = |i: usize| labels.get(i).expect("labeled");
    let c = labels.num_classes();
    let mut present = vec![false; c];
    for &i in &labeled {
        present[class_of(i)] = true;
    }
    let wanted = present.iter().filter(|&&p| p).count();

    let mut table = Table::new(&[
        "fraction",
        "accuracy_mean",
        "accuracy_std",
        "f1_mean",
        "f1_std",
    ]);
    for (fi, &f) in config.train_fractions.iter().enumerate() {
        let n_train = (f * labeled.len() as f64).round() as usize;
        if f.is_nan() || f <= 0.0 || n_train >= labeled.len() {
            return Err(Error::Config(format!(
                "train fraction {f} leaves no labeled nodes for evaluation"
            )));
        }
        let mut accs = Vec::new();
        let mut f1s = Vec::new();
        for trial in 0..config.n_trials {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                config.seed,
                "classify",
                (fi * config.n_trials + trial) as u64,
            ));
            let mut order = labeled.clone();
            let mut ok = false;
            for _ in 0..MAX_RESAMPLES {
                order.shuffle(&mut rng);
                let mut seen = vec![false; c];
                for &i in &order[..n_train] {
                    seen[class_of(i)] = true;
                }
                if seen.iter().filter(|&&s| s).count() == wanted {
                    ok = true;
                    break;
                }
            }
            if !ok {
                return Err(Error::Infeasible(format!(
                    "no training sample of fraction {f} covers all classes after \
                     {MAX_RESAMPLES} draws"
                )));
            }
            let (train, test) = order.split_at(n_train);
            let xt = features.select(Axis(0), train);
            let yt: Vec<usize> = train.iter().map(|&i| class_of(i)).collect();
            let l2 = if config.cross_validate && train.len() >= 3 {
                select_l2_by_cv(
                    &xt,
                    &yt,
                    c,
                    &L2_GRID,
                    3,
                    config.max_iters,
                    rng.next_u64_seed(),
                )?
            } else {
                config.l2
            };
            let model = fit_logistic_regression(&xt, &yt, c, l2, config.max_iters)?;
            let xv = features.select(Axis(0), test);
            let yv: Vec<usize> = test.iter().map(|&i| class_of(i)).collect();
            let pred = model.predict(&xv);
            accs.push(accuracy(&pred, &yv));
            f1s.push(macro_f1(&pred, &yv, c));
        }
        let (am, asd) = mean_std(&accs);
        let (fm, fsd) = mean_std(&f1s);
        table.push(vec![f, am, asd, fm, fsd]);
    }
    let mut report = EvaluationReport::new("classify", json!(config));
    report.metrics.insert("accuracy".into(), table.rows[0][1]);
    report.metrics.insert("f1_macro".into(), table.rows[0][3]);
    report.tables.insert("fractions".into(), table);
    Ok(report)
}

trait NextSeed {
    fn next_u64_seed(&mut self) -> u64;
}

impl NextSeed for ChaCha8Rng {
    fn next_u64_seed(&mut self) -> u64 {
        rand::Rng::random(self)
    }
}
