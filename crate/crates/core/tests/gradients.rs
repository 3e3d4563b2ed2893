//! Analytic gradients against central finite differences.

use gaussembed::encoder::embed_all;
use gaussembed::energy::{kl_energy, kl_energy_grad};
use gaussembed::ranking::{loss_and_grads, weighted_loss, WeightedTriplet};
use gaussembed::{Attributes, EncoderParameters, GaussianEmbedding};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEP: f64 = 1e-6;

fn close(analytic: f64, numeric: f64) -> bool {
    (analytic - numeric).abs() <= 1e-5 * analytic.abs().max(numeric.abs()) + 1e-7
}

fn random_gaussian(rng: &mut ChaCha8Rng, l: usize) -> GaussianEmbedding {
    GaussianEmbedding::new(
        (0..l).map(|_| rng.random_range(-2.0..2.0)).collect(),
        (0..l).map(|_| rng.random_range(0.2..3.0)).collect(),
    )
}

#[test]
fn energy_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let l = rng.random_range(1..6);
        let hi = random_gaussian(&mut rng, l);
        let hj = random_gaussian(&mut rng, l);
        let g = kl_energy_grad(hi.view(), hj.view()).unwrap();
        let e =
            |a: &GaussianEmbedding, b: &GaussianEmbedding| kl_energy(a.view(), b.view()).unwrap();
        for d in 0..l {
            let fd = |f: &dyn Fn(&mut GaussianEmbedding, &mut GaussianEmbedding, f64)| {
                let (mut a, mut b) = (hi.clone(), hj.clone());
                f(&mut a, &mut b, STEP);
                let up = e(&a, &b);
                let (mut a, mut b) = (hi.clone(), hj.clone());
                f(&mut a, &mut b, -STEP);
                (up - e(&a, &b)) / (2.0 * STEP)
            };
            let pairs = [
                (g.mu_i[d], fd(&|a, _, h| a.mu[d] += h)),
                (g.var_i[d], fd(&|a, _, h| a.var[d] += h)),
                (g.mu_j[d], fd(&|_, b, h| b.mu[d] += h)),
                (g.var_j[d], fd(&|_, b, h| b.var[d] += h)),
            ];
            for (a, n) in pairs {
                assert!(close(a, n), "dim {d}: analytic {a} numeric {n}");
            }
        }
    }
}

fn pipeline_loss(params: &EncoderParameters, attrs: &Attributes, terms: &[WeightedTriplet]) -> f64 {
    weighted_loss(&embed_all(params, attrs).unwrap(), terms)
}

#[test]
fn pipeline_gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for case in 0..100 {
        let n = rng.random_range(3..7);
        let d = rng.random_range(2..5);
        let hidden = vec![rng.random_range(2..5)];
        let l_half = rng.random_range(1..4);
        let attrs = Attributes::Dense(Array2::from_shape_fn((n, d), |_| {
            rng.random_range(-1.0..1.0)
        }));
        let mut params = EncoderParameters::init_xavier(d, &hidden, l_half, case).unwrap();
        // Zero biases can put a pre-activation exactly on a kink, where central differences
        // are biased; jitter to a generic point.
        for tensor in params.tensors_mut() {
            tensor
                .iter_mut()
                .for_each(|w| *w += rng.random_range(-0.1..0.1));
        }
        let terms: Vec<WeightedTriplet> = (0..4)
            .map(|_| WeightedTriplet {
                anchor: rng.random_range(0..n),
                pos: rng.random_range(0..n),
                neg: rng.random_range(0..n),
                weight: rng.random_range(0.5..3.0),
            })
            .collect();
        let (loss, grads) = loss_and_grads(&params, &attrs, &terms).unwrap();
        assert!(close(loss, pipeline_loss(&params, &attrs, &terms)));

        let analytic: Vec<f64> = grads.tensors().concat();
        let mut idx = 0;
        for t in 0..params.tensors().len() {
            for c in 0..params.tensors()[t].len() {
                let orig = params.tensors()[t][c];
                params.tensors_mut()[t][c] = orig + STEP;
                let up = pipeline_loss(&params, &attrs, &terms);
                params.tensors_mut()[t][c] = orig - STEP;
                let down = pipeline_loss(&params, &attrs, &terms);
                params.tensors_mut()[t][c] = orig;
                let numeric = (up - down) / (2.0 * STEP);
                assert!(
                    close(analytic[idx], numeric),
                    "case {case} tensor {t} coord {c}: analytic {} numeric {numeric}",
                    analytic[idx]
                );
                idx += 1;
            }
        }
    }
}
