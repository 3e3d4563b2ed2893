//! The shared feed-forward encoder mapping attribute rows to Gaussian embeddings.
//!
//! ```text
//! h   = relu(x W_1 + b_1)            (repeated per hidden layer)
//! mu  = h W_mu + b_mu
//! var = elu(h W_var + b_var) + 1     (elu with alpha = 1)
//! ```
//!
//! All matrix products are written as row-wise `axpy` loops over the non-zero inputs, so a
//! row's result never depends on which other rows share its batch, and a one-hot input row
//! selects a weight row exactly.

use ndarray::{Array1, Array2, ArrayView1, ArrayViewMut1};
use rand::distr::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::energy::{Embeddings, GaussianEmbedding};
use crate::error::{Error, Result};
use crate::graph::Attributes;

/// Default hidden layer sizes.
pub const DEFAULT_HIDDEN: &[usize] = &[512];

/// An affine map `x W + b` with `W` stored `in x out`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: Array2::zeros((fan_in, fan_out)),
            bias: Array1::zeros(fan_out),
        }
    }

    fn xavier(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let bound = xavier_bound(fan_in, fan_out);
        let dist = Uniform::new_inclusive(-bound, bound).expect("finite bound");
        Self {
            weight: Array2::from_shape_fn((fan_in, fan_out), |_| dist.sample(rng)),
            bias: Array1::zeros(fan_out),
        }
    }

    /// Builds a layer from a row-major `fan_in x fan_out` weight buffer and a bias.
    pub fn from_vecs(
        fan_in: usize,
        fan_out: usize,
        weight: Vec<f64>,
        bias: Vec<f64>,
    ) -> Result<Self> {
        if bias.len() != fan_out {
            return Err(Error::Shape(format!(
                "bias has {} entries, layer has {fan_out} outputs",
                bias.len()
            )));
        }
        let weight = Array2::from_shape_vec((fan_in, fan_out), weight)
            .map_err(|e| Error::Shape(format!("weight buffer: {e}")))?;
        Ok(Self {
            weight,
            bias: Array1::from(bias),
        })
    }

    pub fn fan_in(&self) -> usize {
        self.weight.nrows()
    }

    pub fn fan_out(&self) -> usize {
        self.weight.ncols()
    }
}

/// Half-width of the Xavier/Glorot uniform initialization interval.
pub fn xavier_bound(fan_in: usize, fan_out: usize) -> f64 {
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}

/// Encoder weights. Also used as the container for their gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParameters {
    pub hidden: Vec<Dense>,
    pub mu_head: Dense,
    pub var_head: Dense,
}

impl EncoderParameters {
    /// Xavier-uniform weights and zero biases. Draws happen layer by layer in row-major
    /// order, so a seed fully determines the parameters.
    pub fn init_xavier(
        input_dim: usize,
        hidden_sizes: &[usize],
        l_half: usize,
        seed: u64,
    ) -> Result<Self> {
        if input_dim == 0 || l_half == 0 || hidden_sizes.contains(&0) {
            return Err(Error::Config(format!(
                "all layer sizes must be positive (input {input_dim}, hidden {hidden_sizes:?}, \
                 embedding {l_half})"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut fan_in = input_dim;
        let mut hidden = Vec::with_capacity(hidden_sizes.len());
        for &size in hidden_sizes {
            hidden.push(Dense::xavier(fan_in, size, &mut rng));
            fan_in = size;
        }
        let mu_head = Dense::xavier(fan_in, l_half, &mut rng);
        let var_head = Dense::xavier(fan_in, l_half, &mut rng);
        Ok(Self {
            hidden,
            mu_head,
            var_head,
        })
    }

    pub fn zeros(input_dim: usize, hidden_sizes: &[usize], l_half: usize) -> Self {
        let mut fan_in = input_dim;
        let mut hidden = Vec::new();
        for &size in hidden_sizes {
            hidden.push(Dense::zeros(fan_in, size));
            fan_in = size;
        }
        Self {
            hidden,
            mu_head: Dense::zeros(fan_in, l_half),
            var_head: Dense::zeros(fan_in, l_half),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.input_dim(), &self.hidden_sizes(), self.l_half())
    }

    pub fn input_dim(&self) -> usize {
        self.hidden.first().unwrap_or(&self.mu_head).fan_in()
    }

    pub fn hidden_sizes(&self) -> Vec<usize> {
        self.hidden.iter().map(Dense::fan_out).collect()
    }

    pub fn l_half(&self) -> usize {
        self.mu_head.fan_out()
    }

    fn layers(&self) -> impl Iterator<Item = &Dense> {
        self.hidden.iter().chain([&self.mu_head, &self.var_head])
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut Dense> {
        self.hidden
            .iter_mut()
            .chain([&mut self.mu_head, &mut self.var_head])
    }

    /// Every tensor as a flat slice, in checkpoint order: each hidden layer's weight then
    /// bias, then the mean head, then the variance head.
    pub fn tensors(&self) -> Vec<&[f64]> {
        self.layers()
            .flat_map(|l| {
                [
                    l.weight.as_slice().expect("standard layout"),
                    l.bias.as_slice().expect("standard layout"),
                ]
            })
            .collect()
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers_mut()
            .flat_map(|l| {
                [
                    l.weight.as_slice_mut().expect("standard layout"),
                    l.bias.as_slice_mut().expect("standard layout"),
                ]
            })
            .collect()
    }

    /// Names matching [`tensors`](Self::tensors).
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for i in 0..self.hidden.len() {
            names.push(format!("hidden{i}.weight"));
            names.push(format!("hidden{i}.bias"));
        }
        for head in ["mu_head", "var_head"] {
            names.push(format!("{head}.weight"));
            names.push(format!("{head}.bias"));
        }
        names
    }

    pub fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn all_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// `self += scale * other`.
    pub fn add_scaled(&mut self, other: &EncoderParameters, scale: f64) {
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += scale * s;
            }
        }
    }

    pub fn same_shape(&self, other: &EncoderParameters) -> bool {
        self.input_dim() == other.input_dim()
            && self.hidden_sizes() == other.hidden_sizes()
            && self.l_half() == other.l_half()
    }
}

#[inline]
fn axpy(y: &mut ArrayViewMut1<'_, f64>, a: f64, x: ArrayView1<'_, f64>) {
    let y = y.as_slice_mut().expect("contiguous");
    let x = x.as_slice().expect("contiguous");
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

#[inline]
fn dot(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    let a = a.as_slice().expect("contiguous");
    let b = b.as_slice().expect("contiguous");
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `out[r] = sum_k x[r,k] W[k] + b`, accumulating over non-zero `x[r,k]` in ascending `k`.
fn affine_sparse_input(input: &Attributes, layer: &Dense) -> Array2<f64> {
    let mut out = Array2::zeros((input.nrows(), layer.fan_out()));
    for (r, mut row) in out.rows_mut().into_iter().enumerate() {
        input.for_each_nonzero(r, |k, v| axpy(&mut row, v, layer.weight.row(k)));
        row += &layer.bias;
    }
    out
}

fn affine(input: &Array2<f64>, layer: &Dense) -> Array2<f64> {
    let mut out = Array2::zeros((input.nrows(), layer.fan_out()));
    for (x, mut row) in input.rows().into_iter().zip(out.rows_mut()) {
        for (k, &v) in x.iter().enumerate() {
            if v != 0.0 {
                axpy(&mut row, v, layer.weight.row(k));
            }
        }
        row += &layer.bias;
    }
    out
}

#[inline]
fn elu_plus_one(x: f64) -> f64 {
    // elu(x) + 1 == exp(x) for x < 0; the floor keeps the variance representable when
    // exp underflows.
    if x >= 0.0 {
        x + 1.0
    } else {
        x.exp().max(f64::MIN_POSITIVE)
    }
}

#[inline]
fn elu_grad(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        x.exp()
    }
}

/// Intermediate values kept by the forward pass for reverse-mode differentiation.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    input: Attributes,
    /// Post-relu activations of each hidden layer.
    activations: Vec<Array2<f64>>,
    /// Pre-activation of the variance head.
    var_pre: Array2<f64>,
    shape: (usize, Vec<usize>, usize),
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.input.nrows()
    }
}

fn check_input(params: &EncoderParameters, input: &Attributes) -> Result<()> {
    if input.ncols() != params.input_dim() {
        return Err(Error::Shape(format!(
            "attribute dimension {} does not match encoder input dimension {}",
            input.ncols(),
            params.input_dim()
        )));
    }
    if !input.all_finite() {
        return Err(Error::Domain("non-finite attribute value".into()));
    }
    Ok(())
}

fn forward_rows(params: &EncoderParameters, input: Attributes) -> (Embeddings, ForwardCache) {
    let mut activations: Vec<Array2<f64>> = Vec::with_capacity(params.hidden.len());
    for (l, layer) in params.hidden.iter().enumerate() {
        let mut h = match l {
            0 => affine_sparse_input(&input, layer),
            _ => affine(&activations[l - 1], layer),
        };
        h.mapv_inplace(|v| v.max(0.0));
        activations.push(h);
    }
    let (mu, var_pre) = match activations.last() {
        Some(h) => (affine(h, &params.mu_head), affine(h, &params.var_head)),
        None => (
            affine_sparse_input(&input, &params.mu_head),
            affine_sparse_input(&input, &params.var_head),
        ),
    };
    let var = var_pre.mapv(elu_plus_one);
    let cache = ForwardCache {
        input,
        activations,
        var_pre,
        shape: (params.input_dim(), params.hidden_sizes(), params.l_half()),
    };
    (Embeddings::new(mu, var), cache)
}

/// Encodes the listed rows of `attrs`, keeping what [`backward_batch`] needs.
pub fn forward_batch(
    params: &EncoderParameters,
    attrs: &Attributes,
    rows: &[usize],
) -> Result<(Embeddings, ForwardCache)> {
    if let Some(&r) = rows.iter().find(|&&r| r >= attrs.nrows()) {
        return Err(Error::OutOfBounds {
            what: "attribute row",
            index: r,
            limit: attrs.nrows(),
        });
    }
    let input = attrs.select_rows(rows);
    check_input(params, &input)?;
    Ok(forward_rows(params, input))
}

/// Encodes one dense attribute row.
pub fn forward(params: &EncoderParameters, x: &[f64]) -> Result<(GaussianEmbedding, ForwardCache)> {
    let input =
        Attributes::Dense(Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("row shape"));
    check_input(params, &input)?;
    let (emb, cache) = forward_rows(params, input);
    Ok((emb.get(0).to_owned(), cache))
}

/// Embeddings of the listed rows, without a cache.
pub fn embed(params: &EncoderParameters, attrs: &Attributes, rows: &[usize]) -> Result<Embeddings> {
    forward_batch(params, attrs, rows).map(|(e, _)| e)
}

/// Embeddings of every row of `attrs`.
pub fn embed_all(params: &EncoderParameters, attrs: &Attributes) -> Result<Embeddings> {
    let rows: Vec<usize> = (0..attrs.nrows()).collect();
    embed(params, attrs, &rows)
}

/// Accumulates `dW += x^T dz` and `db += sum_r dz[r]` for a layer fed by `input`.
fn accumulate_layer_grad_sparse(grad: &mut Dense, input: &Attributes, dz: &Array2<f64>) {
    for (r, dz_row) in dz.rows().into_iter().enumerate() {
        input.for_each_nonzero(r, |k, v| axpy(&mut grad.weight.row_mut(k), v, dz_row));
        grad.bias += &dz_row;
    }
}

fn accumulate_layer_grad(grad: &mut Dense, input: &Array2<f64>, dz: &Array2<f64>) {
    for (x, dz_row) in input.rows().into_iter().zip(dz.rows()) {
        for (k, &v) in x.iter().enumerate() {
            if v != 0.0 {
                axpy(&mut grad.weight.row_mut(k), v, dz_row);
            }
        }
        grad.bias += &dz_row;
    }
}

/// `dz W^T`, the gradient flowing into a layer's input.
fn propagate(dz: &Array2<f64>, layer: &Dense) -> Array2<f64> {
    let mut out = Array2::zeros((dz.nrows(), layer.fan_in()));
    for (dz_row, mut out_row) in dz.rows().into_iter().zip(out.rows_mut()) {
        for (k, o) in out_row.iter_mut().enumerate() {
            *o = dot(dz_row, layer.weight.row(k));
        }
    }
    out
}

/// Reverse pass. `grad_mu`/`grad_var` hold the loss partials for every row of the batch.
/// Returns parameter gradients and, on request, the gradient with respect to the input rows.
pub fn backward_batch(
    params: &EncoderParameters,
    cache: &ForwardCache,
    grad_mu: &Array2<f64>,
    grad_var: &Array2<f64>,
    want_input_grad: bool,
) -> Result<(EncoderParameters, Option<Array2<f64>>)> {
    let expected = (cache.batch_size(), params.l_half());
    if cache.shape != (params.input_dim(), params.hidden_sizes(), params.l_half())
        || grad_mu.dim() != expected
        || grad_var.dim() != expected
    {
        return Err(Error::Shape(
            "backward pass does not match its forward cache".into(),
        ));
    }
    let mut grads = params.zeros_like();
    let dz_var = grad_var * &cache.var_pre.mapv(elu_grad);
    let dz_mu = grad_mu;

    let Some(last) = cache.activations.last() else {
        accumulate_layer_grad_sparse(&mut grads.mu_head, &cache.input, dz_mu);
        accumulate_layer_grad_sparse(&mut grads.var_head, &cache.input, &dz_var);
        let input_grad = want_input_grad
            .then(|| propagate(dz_mu, &params.mu_head) + propagate(&dz_var, &params.var_head));
        return Ok((grads, input_grad));
    };
    accumulate_layer_grad(&mut grads.mu_head, last, dz_mu);
    accumulate_layer_grad(&mut grads.var_head, last, &dz_var);
    let mut d_act = propagate(dz_mu, &params.mu_head) + propagate(&dz_var, &params.var_head);

    for l in (0..params.hidden.len()).rev() {
        // relu' is 0 at exactly 0 (the subgradient choice).
        let mut dz = d_act;
        dz.zip_mut_with(&cache.activations[l], |g, &a| {
            if a <= 0.0 {
                *g = 0.0;
            }
        });
        if l == 0 {
            accumulate_layer_grad_sparse(&mut grads.hidden[0], &cache.input, &dz);
            let input_grad = want_input_grad.then(|| propagate(&dz, &params.hidden[0]));
            return Ok((grads, input_grad));
        }
        accumulate_layer_grad(&mut grads.hidden[l], &cache.activations[l - 1], &dz);
        d_act = propagate(&dz, &params.hidden[l]);
    }
    unreachable!("loop returns at the first layer")
}

/// Single-row reverse pass matching [`forward`].
pub fn backward(
    params: &EncoderParameters,
    cache: &ForwardCache,
    grad_mu: &[f64],
    grad_var: &[f64],
) -> Result<(EncoderParameters, Vec<f64>)> {
    if cache.batch_size() != 1 {
        return Err(Error::Shape("single-row backward on a batch cache".into()));
    }
    let to_row = |g: &[f64]| {
        Array2::from_shape_vec((1, g.len()), g.to_vec()).map_err(|e| Error::Shape(e.to_string()))
    };
    let (grads, input) =
        backward_batch(params, cache, &to_row(grad_mu)?, &to_row(grad_var)?, true)?;
    Ok((grads, input.expect("requested").row(0).to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn xavier_bound_for_cora_sized_layer() {
        assert!((xavier_bound(2879, 512) - 0.04206).abs() < 5e-6);
        let p = EncoderParameters::init_xavier(30, &[20], 4, 7).unwrap();
        let b = xavier_bound(30, 20);
        assert!(p.hidden[0].weight.iter().all(|w| w.abs() <= b));
        assert!(p.layers().all(|l| l.bias.iter().all(|&x| x == 0.0)));
        assert_eq!(p, EncoderParameters::init_xavier(30, &[20], 4, 7).unwrap());
        assert_ne!(p, EncoderParameters::init_xavier(30, &[20], 4, 8).unwrap());
        assert!(EncoderParameters::init_xavier(30, &[0], 4, 7).is_err());
    }

    #[test]
    fn zero_parameters_give_standard_normal() {
        let p = EncoderParameters::zeros(3, &[5], 2);
        let (e, _) = forward(&p, &[1.0, -2.0, 0.5]).unwrap();
        assert_eq!(e.mu, vec![0.0, 0.0]);
        assert_eq!(e.var, vec![1.0, 1.0]);
    }

    #[test]
    fn extreme_negative_variance_preactivation_stays_positive() {
        let mut p = EncoderParameters::zeros(1, &[1], 1);
        p.var_head.bias[0] = -1000.0;
        let (e, _) = forward(&p, &[0.0]).unwrap();
        assert!(e.var[0] > 0.0);
    }

    #[test]
    fn relu_blocks_negative_input() {
        let mut p = EncoderParameters::zeros(1, &[1], 1);
        p.hidden[0].weight[[0, 0]] = 1.0;
        p.mu_head.weight[[0, 0]] = 1.0;
        let (e, _) = forward(&p, &[-3.0]).unwrap();
        assert_eq!(e.mu, vec![0.0]);
    }

    #[test]
    fn zero_upstream_gradient_gives_zero_parameter_gradient() {
        let p = EncoderParameters::init_xavier(4, &[6, 5], 3, 1).unwrap();
        let (_, cache) = forward(&p, &[0.3, -0.2, 1.0, 0.0]).unwrap();
        let (g, dx) = backward(&p, &cache, &[0.0; 3], &[0.0; 3]).unwrap();
        assert!(g.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
        assert!(dx.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn one_hot_row_touches_single_weight_row() {
        let p = EncoderParameters::init_xavier(5, &[8], 2, 3).unwrap();
        let attrs = Attributes::OneHot(5);
        let (_, cache) = forward_batch(&p, &attrs, &[2]).unwrap();
        let (g, _) =
            backward_batch(&p, &cache, &array![[0.3, -1.0]], &array![[0.5, 0.2]], false).unwrap();
        for (k, row) in g.hidden[0].weight.rows().into_iter().enumerate() {
            let nonzero = row.iter().any(|&v| v != 0.0);
            assert_eq!(nonzero, k == 2, "row {k}");
        }
    }

    #[test]
    fn one_hot_matches_dense_identity_bit_for_bit() {
        let p = EncoderParameters::init_xavier(6, &[7], 3, 9).unwrap();
        let rows = [0, 5, 3, 3];
        let (a, _) = forward_batch(&p, &Attributes::OneHot(6), &rows).unwrap();
        let (b, _) = forward_batch(&p, &Attributes::Dense(Array2::eye(6)), &rows).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn batch_rows_match_single_rows_and_permute() {
        let p = EncoderParameters::init_xavier(4, &[9], 3, 2).unwrap();
        let x = array![
            [0.1, -0.4, 2.0, 0.0],
            [1.5, 0.3, -0.7, 0.2],
            [0.0, 0.0, 0.3, 0.9]
        ];
        let attrs = Attributes::Dense(x.clone());
        let (batch, _) = forward_batch(&p, &attrs, &[0, 1, 2]).unwrap();
        for r in 0..3 {
            let (single, _) = forward(&p, x.row(r).as_slice().unwrap()).unwrap();
            assert_eq!(batch.get(r).to_owned(), single);
        }
        let (perm, _) = forward_batch(&p, &attrs, &[2, 0, 1, 0]).unwrap();
        assert_eq!(perm.get(0).to_owned(), batch.get(2).to_owned());
        assert_eq!(perm.get(1).to_owned(), batch.get(0).to_owned());
        assert_eq!(perm.get(3).to_owned(), batch.get(0).to_owned());
    }

    #[test]
    fn shape_and_domain_errors() {
        let p = EncoderParameters::init_xavier(3, &[4], 2, 0).unwrap();
        assert!(matches!(forward(&p, &[1.0, 2.0]), Err(Error::Shape(_))));
        assert!(matches!(
            forward(&p, &[1.0, f64::NAN, 0.0]),
            Err(Error::Domain(_))
        ));
        let (_, cache) = forward(&p, &[1.0, 2.0, 3.0]).unwrap();
        let other = EncoderParameters::init_xavier(3, &[5], 2, 0).unwrap();
        assert!(backward(&other, &cache, &[0.0; 2], &[0.0; 2]).is_err());
        assert!(backward(&p, &cache, &[0.0; 3], &[0.0; 2]).is_err());
    }

    #[test]
    fn tensor_order_and_names_agree() {
        let p = EncoderParameters::init_xavier(3, &[4, 2], 5, 0).unwrap();
        let sizes: Vec<usize> = p.tensors().iter().map(|t| t.len()).collect();
        assert_eq!(sizes, vec![12, 4, 8, 2, 10, 5, 10, 5]);
        assert_eq!(p.tensor_names().len(), sizes.len());
        assert_eq!(p.num_params(), sizes.iter().sum::<usize>());
    }
}
