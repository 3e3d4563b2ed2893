//! Diagonal Gaussian embeddings and the asymmetric KL energy between them.
//!
//! The energy of the ordered pair `(i, j)` is `E_ij = KL(N_j || N_i)`:
//!
//! ```text
//! E_ij = 1/2 * sum_d [ var_j/var_i + (mu_i - mu_j)^2/var_i - 1 + ln var_i - ln var_j ]
//! ```
//!
//! Note that node `i`'s Gaussian is the *second* argument of the divergence. `var` always
//! holds variances (the diagonal of the covariance), never standard deviations.

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A node embedded as `N(mu, diag(var))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianEmbedding {
    pub mu: Vec<f64>,
    pub var: Vec<f64>,
}

impl GaussianEmbedding {
    pub fn new(mu: Vec<f64>, var: Vec<f64>) -> Self {
        Self { mu, var }
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    pub fn view(&self) -> GaussianRef<'_> {
        GaussianRef {
            mu: &self.mu,
            var: &self.var,
        }
    }
}

/// Borrowed form of [`GaussianEmbedding`], e.g. a row of [`Embeddings`].
#[derive(Debug, Clone, Copy)]
pub struct GaussianRef<'a> {
    pub mu: &'a [f64],
    pub var: &'a [f64],
}

impl GaussianRef<'_> {
    pub fn to_owned(&self) -> GaussianEmbedding {
        GaussianEmbedding::new(self.mu.to_vec(), self.var.to_vec())
    }
}

/// Embeddings of a node collection, one row per node.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings {
    pub mu: Array2<f64>,
    pub var: Array2<f64>,
}

impl Embeddings {
    pub fn new(mu: Array2<f64>, var: Array2<f64>) -> Self {
        assert_eq!(mu.dim(), var.dim(), "mean and variance shapes differ");
        Self { mu, var }
    }

    pub fn len(&self) -> usize {
        self.mu.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.mu.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.mu.ncols()
    }

    pub fn get(&self, i: usize) -> GaussianRef<'_> {
        GaussianRef {
            mu: row_slice(self.mu.row(i)),
            var: row_slice(self.var.row(i)),
        }
    }

    pub fn to_vec(&self) -> Vec<GaussianEmbedding> {
        (0..self.len()).map(|i| self.get(i).to_owned()).collect()
    }

    pub fn from_rows(rows: &[GaussianEmbedding]) -> Self {
        let dim = rows.first().map_or(0, GaussianEmbedding::dim);
        let mu = Array2::from_shape_fn((rows.len(), dim), |(i, d)| rows[i].mu[d]);
        let var = Array2::from_shape_fn((rows.len(), dim), |(i, d)| rows[i].var[d]);
        Self { mu, var }
    }

    /// Mean variance of every dimension across all nodes.
    pub fn mean_variance_per_dim(&self) -> Vec<f64> {
        let n = self.len() as f64;
        (0..self.dim())
            .map(|d| self.var.column(d).sum() / n)
            .collect()
    }

    /// Mean over dimensions of each node's variance vector.
    pub fn mean_variance_per_node(&self) -> Vec<f64> {
        let l = self.dim() as f64;
        self.var.rows().into_iter().map(|r| r.sum() / l).collect()
    }
}

fn row_slice<'a>(row: ArrayView1<'a, f64>) -> &'a [f64] {
    row.to_slice().expect("embedding rows are contiguous")
}

fn validate(hi: GaussianRef<'_>, hj: GaussianRef<'_>) -> Result<()> {
    let l = hi.mu.len();
    if hi.var.len() != l || hj.mu.len() != l || hj.var.len() != l {
        return Err(Error::Shape(format!(
            "embedding dimensions differ ({}/{} vs {}/{})",
            hi.mu.len(),
            hi.var.len(),
            hj.mu.len(),
            hj.var.len()
        )));
    }
    if let Some(v) = hi
        .var
        .iter()
        .chain(hj.var)
        .find(|&&v| v.is_nan() || v <= 0.0)
    {
        return Err(Error::Domain(format!("variance must be positive, got {v}")));
    }
    Ok(())
}

#[inline]
fn dim_term(mu_i: f64, var_i: f64, mu_j: f64, var_j: f64) -> f64 {
    let diff = mu_i - mu_j;
    var_j / var_i + diff * diff / var_i - 1.0 + var_i.ln() - var_j.ln()
}

/// `E_ij` without validation; callers guarantee equal lengths and positive variances.
#[inline]
pub fn energy(hi: GaussianRef<'_>, hj: GaussianRef<'_>) -> f64 {
    let mut sum = 0.0;
    for d in 0..hi.mu.len() {
        sum += dim_term(hi.mu[d], hi.var[d], hj.mu[d], hj.var[d]);
    }
    0.5 * sum
}

/// The energy `E_ij = KL(N_j || N_i)` of the ordered pair `(i, j)`.
pub fn kl_energy(hi: GaussianRef<'_>, hj: GaussianRef<'_>) -> Result<f64> {
    validate(hi, hj)?;
    Ok(energy(hi, hj))
}

/// `E_ij` summed over `kept_dims` only. With all dimensions kept this equals [`kl_energy`]
/// exactly.
pub fn kl_energy_restricted(
    hi: GaussianRef<'_>,
    hj: GaussianRef<'_>,
    kept_dims: &[usize],
) -> Result<f64> {
    validate(hi, hj)?;
    let mut kept = kept_dims.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() {
        return Err(Error::Domain("no dimensions kept".into()));
    }
    if let Some(&d) = kept.last().filter(|&&d| d >= hi.mu.len()) {
        return Err(Error::OutOfBounds {
            what: "dimension",
            index: d,
            limit: hi.mu.len(),
        });
    }
    Ok(energy_restricted(hi, hj, &kept))
}

/// Unchecked restricted energy; `kept` must be sorted, unique and in range.
pub(crate) fn energy_restricted(hi: GaussianRef<'_>, hj: GaussianRef<'_>, kept: &[usize]) -> f64 {
    let mut sum = 0.0;
    for &d in kept {
        sum += dim_term(hi.mu[d], hi.var[d], hj.mu[d], hj.var[d]);
    }
    0.5 * sum
}

/// Partial derivatives of `E_ij` with respect to both nodes' parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyGrad {
    pub mu_i: Vec<f64>,
    pub var_i: Vec<f64>,
    pub mu_j: Vec<f64>,
    pub var_j: Vec<f64>,
}

pub fn kl_energy_grad(hi: GaussianRef<'_>, hj: GaussianRef<'_>) -> Result<EnergyGrad> {
    validate(hi, hj)?;
    let l = hi.mu.len();
    let mut g = EnergyGrad {
        mu_i: vec![0.0; l],
        var_i: vec![0.0; l],
        mu_j: vec![0.0; l],
        var_j: vec![0.0; l],
    };
    add_energy_grad(
        hi,
        hj,
        1.0,
        &mut g.mu_i,
        &mut g.var_i,
        &mut g.mu_j,
        &mut g.var_j,
    );
    Ok(g)
}

/// Per-dimension partials `(dE/dmu_i, dE/dvar_i, dE/dvar_j)`; `dE/dmu_j = -dE/dmu_i`.
#[inline]
pub(crate) fn dim_grad(mu_i: f64, var_i: f64, mu_j: f64, var_j: f64) -> (f64, f64, f64) {
    let inv = 1.0 / var_i;
    let diff = mu_i - mu_j;
    (
        diff * inv,
        0.5 * (inv - var_j * inv * inv - diff * diff * inv * inv),
        0.5 * (inv - 1.0 / var_j),
    )
}

/// Adds `scale * dE_ij/d(.)` into the four gradient buffers.
fn add_energy_grad(
    hi: GaussianRef<'_>,
    hj: GaussianRef<'_>,
    scale: f64,
    g_mu_i: &mut [f64],
    g_var_i: &mut [f64],
    g_mu_j: &mut [f64],
    g_var_j: &mut [f64],
) {
    for d in 0..hi.mu.len() {
        let (dmu, dvar_i, dvar_j) = dim_grad(hi.mu[d], hi.var[d], hj.mu[d], hj.var[d]);
        g_mu_i[d] += scale * dmu;
        g_mu_j[d] -= scale * dmu;
        g_var_i[d] += scale * dvar_i;
        g_var_j[d] += scale * dvar_j;
    }
}
