use ndarray::Array2;

use crate::error::{Error, Result};

/// Compressed sparse row storage for an attribute matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseRows {
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRows {
    /// Builds a matrix from `(row, col, value)` triplets. Explicit zeros are dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        mut triplets: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        for &(r, c, _) in &triplets {
            if r >= nrows {
                return Err(Error::OutOfBounds {
                    what: "attribute row",
                    index: r,
                    limit: nrows,
                });
            }
            if c >= ncols {
                return Err(Error::OutOfBounds {
                    what: "feature id",
                    index: c,
                    limit: ncols,
                });
            }
        }
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        for w in triplets.windows(2) {
            if w[0].0 == w[1].0 && w[0].1 == w[1].1 {
                return Err(Error::Conflict(format!(
                    "attribute ({}, {}) given twice",
                    w[0].0, w[0].1
                )));
            }
        }
        let mut indptr = vec![0; nrows + 1];
        let mut indices = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            if v == 0.0 {
                continue;
            }
            indptr[r + 1] += 1;
            indices.push(c);
            values.push(v);
        }
        for r in 0..nrows {
            indptr[r + 1] += indptr[r];
        }
        Ok(Self {
            ncols,
            indptr,
            indices,
            values,
        })
    }

    pub fn nrows(&self) -> usize {
        self.indptr.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[f64]) {
        let span = self.indptr[r]..self.indptr[r + 1];
        (&self.indices[span.clone()], &self.values[span])
    }

    fn select_rows(&self, rows: &[usize]) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        indptr.push(0);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for &r in rows {
            let (idx, val) = self.row(r);
            indices.extend_from_slice(idx);
            values.extend_from_slice(val);
            indptr.push(indices.len());
        }
        Self {
            ncols: self.ncols,
            indptr,
            indices,
            values,
        }
    }
}

/// Node attribute matrix, `N` rows by `D` columns.
#[derive(Debug, Clone, PartialEq)]
pub enum Attributes {
    Dense(Array2<f64>),
    Sparse(SparseRows),
    /// The identity matrix of the given size, used for plain graphs.
    OneHot(usize),
}

impl Attributes {
    pub fn nrows(&self) -> usize {
        match self {
            Attributes::Dense(m) => m.nrows(),
            Attributes::Sparse(s) => s.nrows(),
            Attributes::OneHot(n) => *n,
        }
    }

    pub fn ncols(&self) -> usize {
        match self {
            Attributes::Dense(m) => m.ncols(),
            Attributes::Sparse(s) => s.ncols(),
            Attributes::OneHot(n) => *n,
        }
    }

    pub fn is_one_hot(&self) -> bool {
        matches!(self, Attributes::OneHot(_))
    }

    /// Calls `f(col, value)` for every non-zero entry of row `r`, in ascending column order.
    #[inline]
    pub fn for_each_nonzero(&self, r: usize, mut f: impl FnMut(usize, f64)) {
        match self {
            Attributes::Dense(m) => {
                for (c, &v) in m.row(r).iter().enumerate() {
                    if v != 0.0 {
                        f(c, v);
                    }
                }
            }
            Attributes::Sparse(s) => {
                let (idx, val) = s.row(r);
                for (&c, &v) in idx.iter().zip(val) {
                    f(c, v);
                }
            }
            Attributes::OneHot(_) => f(r, 1.0),
        }
    }

    pub fn dense_row(&self, r: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.ncols()];
        self.for_each_nonzero(r, |c, v| row[c] = v);
        row
    }

    pub fn to_dense(&self) -> Array2<f64> {
        let mut m = Array2::zeros((self.nrows(), self.ncols()));
        for r in 0..self.nrows() {
            self.for_each_nonzero(r, |c, v| m[[r, c]] = v);
        }
        m
    }

    /// Returns the rows listed in `rows`, in that order. One-hot rows become sparse rows.
    pub fn select_rows(&self, rows: &[usize]) -> Attributes {
        match self {
            Attributes::Dense(m) => Attributes::Dense(m.select(ndarray::Axis(0), rows)),
            Attributes::Sparse(s) => Attributes::Sparse(s.select_rows(rows)),
            Attributes::OneHot(n) => {
                let triplets = rows.iter().enumerate().map(|(i, &r)| (i, r, 1.0)).collect();
                Attributes::Sparse(
                    SparseRows::from_triplets(rows.len(), *n, triplets)
                        .expect("one-hot rows are in range"),
                )
            }
        }
    }

    pub fn all_finite(&self) -> bool {
        match self {
            Attributes::Dense(m) => m.iter().all(|v| v.is_finite()),
            Attributes::Sparse(s) => s.values.iter().all(|v| v.is_finite()),
            Attributes::OneHot(_) => true,
        }
    }
}
