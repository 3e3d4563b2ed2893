//! Multinomial logistic regression fitted by gradient descent with backtracking.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Regularization strengths tried by cross-validation.
pub const L2_GRID: [f64; 7] = [1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2];

const GRAD_TOL: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    /// `D x C`.
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub l2: f64,
    pub iterations: usize,
}

impl LogisticModel {
    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    /// Row-wise class probabilities.
    pub fn predict_proba(&self, features: &Array2<f64>) -> Array2<f64> {
        let mut z = features.dot(&self.weights) + &self.bias;
        softmax_rows(&mut z);
        z
    }

    pub fn predict(&self, features: &Array2<f64>) -> Vec<usize> {
        let z = features.dot(&self.weights) + &self.bias;
        z.rows()
            .into_iter()
            .map(|r| {
                let mut best = 0;
                for c in 1..r.len() {
                    if r[c] > r[best] {
                        best = c;
                    }
                }
                best
            })
            .collect()
    }

    pub fn weight_norm(&self) -> f64 {
        self.weights.iter().map(|w| w * w).sum::<f64>().sqrt()
    }
}

fn softmax_rows(z: &mut Array2<f64>) {
    for mut row in z.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let s = row.sum();
        row /= s;
    }
}

type Gradient = (Array2<f64>, Array1<f64>);

/// Mean cross-entropy plus `l2 / 2 * |W|^2` (bias unpenalized) and its gradient.
fn objective(
    x: &Array2<f64>,
    y: &[usize],
    w: &Array2<f64>,
    b: &Array1<f64>,
    l2: f64,
    want_grad: bool,
) -> (f64, Option<Gradient>) {
    let n = x.nrows() as f64;
    let mut z = x.dot(w) + b;
    let mut loss = 0.0;
    for (mut row, &c) in z.rows_mut().into_iter().zip(y) {
        let max = row.fold(f64::NEG_INFINITY, |a, &v| a.max(v));
        let lse = max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - row[c];
        if want_grad {
            row.mapv_inplace(|v| (v - lse).exp());
            row[c] -= 1.0;
        }
    }
    loss = loss / n + 0.5 * l2 * w.iter().map(|v| v * v).sum::<f64>();
    if !want_grad {
        return (loss, None);
    }
    z /= n;
    let gw = x.t().dot(&z) + &(w * l2);
    let gb = z.sum_axis(Axis(0));
    (loss, Some((gw, gb)))
}

/// Fits `num_classes`-way logistic regression on `features` rows.
///
/// Stops when the gradient norm drops below 1e-5 or after `max_iters` steps.
pub fn fit_logistic_regression(
    features: &Array2<f64>,
    labels: &[usize],
    num_classes: usize,
    l2: f64,
    max_iters: usize,
) -> Result<LogisticModel> {
    if features.nrows() != labels.len() {
        return Err(Error::Shape(format!(
            "{} feature rows, {} labels",
            features.nrows(),
            labels.len()
        )));
    }
    if let Some(&c) = labels.iter().find(|&&c| c >= num_classes) {
        return Err(Error::OutOfBounds {
            what: "class id",
            index: c,
            limit: num_classes,
        });
    }
    let mut present = vec![false; num_classes];
    for &c in labels {
        present[c] = true;
    }
    if present.iter().filter(|&&p| p).count() < 2 {
        return Err(Error::Infeasible(
            "logistic regression needs at least two classes in the training rows".into(),
        ));
    }
    if l2.is_nan() || l2 < 0.0 {
        return Err(Error::Config(format!("l2 strength must be >= 0, got {l2}")));
    }

    let mut w = Array2::<f64>::zeros((features.ncols(), num_classes));
    let mut b = Array1::<f64>::zeros(num_classes);
    let mut step = 1.0;
    let mut iterations = 0;
    for _ in 0..max_iters {
        let (f, grad) = objective(features, labels, &w, &b, l2, true);
        let (gw, gb) = grad.expect("requested");
        let g2 = gw.iter().chain(gb.iter()).map(|g| g * g).sum::<f64>();
        if g2.sqrt() < GRAD_TOL {
            break;
        }
        iterations += 1;
        let mut accepted = false;
        for _ in 0..60 {
            let w_new = &w - &(&gw * step);
            let b_new = &b - &(&gb * step);
            let (f_new, _) = objective(features, labels, &w_new, &b_new, l2, false);
            if f_new <= f - 1e-4 * step * g2 {
                w = w_new;
                b = b_new;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        step *= 2.0;
    }
    Ok(LogisticModel {
        weights: w,
        bias: b,
        l2,
        iterations,
    })
}

pub(crate) fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    let hits = pred.iter().zip(truth).filter(|(a, b)| a == b).count();
    hits as f64 / truth.len() as f64
}

/// Macro F1 over the classes occurring in either `truth` or `pred`.
pub(crate) fn macro_f1(pred: &[usize], truth: &[usize], num_classes: usize) -> f64 {
    let mut tp = vec![0usize; num_classes];
    let mut fp = vec![0usize; num_classes];
    let mut fn_ = vec![0usize; num_classes];
    for (&p, &t) in pred.iter().zip(truth) {
        if p == t {
            tp[t] += 1;
        } else {
            fp[p] += 1;
            fn_[t] += 1;
        }
    }
    let mut sum = 0.0;
    let mut classes = 0;
    for c in 0..num_classes {
        if tp[c] + fp[c] + fn_[c] == 0 {
            continue;
        }
        classes += 1;
        sum += 2.0 * tp[c] as f64 / (2 * tp[c] + fp[c] + fn_[c]) as f64;
    }
    sum / classes as f64
}

/// Picks the grid value with the best mean held-out accuracy over `folds` folds; ties go to
/// the smaller strength.
pub fn select_l2_by_cv(
    features: &Array2<f64>,
    labels: &[usize],
    num_classes: usize,
    grid: &[f64],
    folds: usize,
    max_iters: usize,
    seed: u64,
) -> Result<f64> {
    if grid.is_empty() || folds < 2 || labels.len() < folds {
        return Err(Error::Config(
            "cross-validation needs a grid, at least 2 folds and a row per fold".into(),
        ));
    }
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut best = (f64::NEG_INFINITY, grid[0]);
    for &l2 in grid {
        let mut total = 0.0;
        let mut used = 0;
        for f in 0..folds {
            let (held, kept): (Vec<usize>, Vec<usize>) =
                order
                    .iter()
                    .enumerate()
                    .fold((vec![], vec![]), |mut acc, (pos, &i)| {
                        if pos % folds == f {
                            acc.0.push(i);
                        } else {
                            acc.1.push(i);
                        }
                        acc
                    });
            let xt = features.select(Axis(0), &kept);
            let yt: Vec<usize> = kept.iter().map(|&i| labels[i]).collect();
            let model = match fit_logistic_regression(&xt, &yt, num_classes, l2, max_iters) {
                Ok(m) => m,
                Err(Error::Infeasible(_)) => continue,
                Err(e) => return Err(e),
            };
            let xv = features.select(Axis(0), &held);
            let yv: Vec<usize> = held.iter().map(|&i| labels[i]).collect();
            total += accuracy(&model.predict(&xv), &yv);
            used += 1;
        }
        if used > 0 && total / used as f64 > best.0 {
            best = (total / used as f64, l2);
        }
    }
    Ok(best.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, Normal};

    fn blobs(n: usize, seed: u64) -> (Array2<f64>, Vec<usize>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.3).unwrap();
        let mut x = Array2::zeros((2 * n, 2));
        let mut y = Vec::new();
        for i in 0..2 * n {
            let c = i % 2;
            let centre = if c == 0 { -2.0 } else { 2.0 };
            x[[i, 0]] = centre + noise.sample(&mut rng);
            x[[i, 1]] = -centre + noise.sample(&mut rng);
            y.push(c);
        }
        (x, y)
    }

    #[test]
    fn separable_blobs_fit_perfectly() {
        let (x, y) = blobs(40, 1);
        let m = fit_logistic_regression(&x, &y, 2, 1e-4, 500).unwrap();
        assert_eq!(accuracy(&m.predict(&x), &y), 1.0);
    }

    #[test]
    fn zero_features_recover_priors() {
        let x = Array2::zeros((10, 3));
        let y = vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 2];
        let m = fit_logistic_regression(&x, &y, 3, 0.1, 2000).unwrap();
        let p = m.predict_proba(&x);
        for (c, prior) in [0.6, 0.3, 0.1].into_iter().enumerate() {
            assert!((p[[0, c]] - prior).abs() < 1e-5, "{}", p[[0, c]]);
        }
        assert_eq!(m.weight_norm(), 0.0);
    }

    #[test]
    fn stronger_l2_shrinks_weights() {
        let (x, y) = blobs(20, 2);
        let mut last = f64::INFINITY;
        for &l2 in &L2_GRID[2..] {
            let norm = fit_logistic_regression(&x, &y, 2, l2, 5000)
                .unwrap()
                .weight_norm();
            let doubled = fit_logistic_regression(&x, &y, 2, 2.0 * l2, 5000)
                .unwrap()
                .weight_norm();
            assert!(doubled <= norm + 1e-6, "{l2}: {doubled} > {norm}");
            assert!(norm <= last + 1e-6);
            last = norm;
        }
    }

    #[test]
    fn single_class_rejected() {
        let x = Array2::zeros((3, 1));
        assert!(fit_logistic_regression(&x, &[1, 1, 1], 2, 0.1, 10).is_err());
    }

    #[test]
    fn f1_perfect_and_cv_runs() {
        assert_eq!(macro_f1(&[0, 1, 2], &[0, 1, 2], 3), 1.0);
        assert_eq!(macro_f1(&[0, 0], &[0, 1], 2), (2.0 / 3.0 + 0.0) / 2.0);
        let (x, y) = blobs(15, 3);
        let l2 = select_l2_by_cv(&x, &y, 2, &L2_GRID, 3, 200, 0).unwrap();
        assert!(L2_GRID.contains(&l2));
    }
}
