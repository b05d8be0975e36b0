//! Row-list sparse storage for ladder-operator algebra.
//!
//! Bosonic bilinears have a handful of nonzeros per row, so products and
//! commutators of them stay cheap even where a dense matrix would not fit.

use nalgebra::DMatrix;

use crate::linalg::{C64, ZERO};

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct SparseMatrix {
    dim: usize,
    // Each row sorted by column, no stored zeros.
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            rows: vec![Vec::new(); dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal((0..dim).map(|_| C64::new(1.0, 0.0)).collect())
    }

    pub fn diagonal(diag: Vec<C64>) -> Self {
        let dim = diag.len();
        let rows = diag
            .into_iter()
            .enumerate()
            .map(|(i, d)| if d == ZERO { Vec::new() } else { vec![(i, d)] })
            .collect();
        Self { dim, rows }
    }

    /// Builds from unsorted `(row, col, value)` triplets; duplicates add.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for (r, c, v) in triplets {
            rows[r].push((c, v));
        }
        for row in &mut rows {
            row.sort_by_key(|&(c, _)| c);
            let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some((lc, lv)) if *lc == c => *lv += v,
                    _ => merged.push((c, v)),
                }
            }
            merged.retain(|&(_, v)| v != ZERO);
            *row = merged;
        }
        Self { dim, rows }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[cfg(test)]
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.rows[r]
            .binary_search_by_key(&c, |&(k, _)| k)
            .map(|p| self.rows[r][p].1)
            .unwrap_or(ZERO)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |&(c, v)| (r, c, v)))
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.iter().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, s: C64) -> Self {
        if s == ZERO {
            return Self::zeros(self.dim);
        }
        Self {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|row| row.iter().map(|&(c, v)| (c, v * s)).collect())
                .collect(),
        }
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &Self, s: C64) -> Self {
        let triplets = self
            .iter()
            .chain(other.iter().map(|(r, c, v)| (r, c, v * s)));
        Self::from_triplets(self.dim, triplets)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        let mut acc = vec![ZERO; self.dim];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![false; self.dim];
        let mut rows = Vec::with_capacity(self.dim);
        for row in &self.rows {
            for &(k, a) in row {
                for &(c, b) in &other.rows[k] {
                    if !mark[c] {
                        mark[c] = true;
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            let mut out = Vec::with_capacity(touched.len());
            for &c in &touched {
                if acc[c] != ZERO {
                    out.push((c, acc[c]));
                }
                acc[c] = ZERO;
                mark[c] = false;
            }
            touched.clear();
            rows.push(out);
        }
        Self { dim: self.dim, rows }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.iter() {
            m[(r, c)] = v;
        }
        m
    }

    /// Extracts the nonzero pattern of a dense matrix.
    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        let dim = m.nrows();
        let rows = (0..dim)
            .map(|r| {
                (0..dim)
                    .filter_map(|c| {
                        let v = m[(r, c)];
                        (v != ZERO).then_some((c, v))
                    })
                    .collect()
            })
            .collect();
        Self { dim, rows }
    }

    /// `self · x` for a dense block of columns.
    pub fn mul_dense(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(self.dim, x.ncols());
        self.mul_dense_into(x, &mut out, C64::new(1.0, 0.0), false);
        out
    }

    /// `out (+)= s · self · x`.
    pub fn mul_dense_into(&self, x: &DMatrix<C64>, out: &mut DMatrix<C64>, s: C64, accumulate: bool) {
        debug_assert_eq!(x.nrows(), self.dim);
        if !accumulate {
            out.fill(ZERO);
        }
        let n = self.dim;
        let xs = x.as_slice();
        let os = out.as_mut_slice();
        for (xc, oc) in xs.chunks_exact(n).zip(os.chunks_exact_mut(n)) {
            for (o, row) in oc.iter_mut().zip(&self.rows) {
                if row.is_empty() {
                    continue;
                }
                let mut sum = ZERO;
                for &(c, v) in row {
                    sum += v * xc[c];
                }
                *o += s * sum;
            }
        }
    }

    /// `x · self` for a dense matrix with `dim` columns.
    pub fn dense_mul(&self, x: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = DMatrix::zeros(x.nrows(), self.dim);
        for (k, row) in self.rows.iter().enumerate() {
            let xk = x.column(k).into_owned();
            for &(c, v) in row {
                let mut oc = out.column_mut(c);
                oc.axpy(v, &xk, C64::new(1.0, 0.0));
            }
        }
        out
    }

    /// Max absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut cols = vec![0.0; self.dim];
        for (_, c, v) in self.iter() {
            cols[c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.iter().fold(0.0, |m, (_, _, v)| m.max(v.norm()))
    }

    pub fn frobenius(&self) -> f64 {
        self.iter().map(|(_, _, v)| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_diagonal(&self) -> bool {
        self.iter().all(|(r, c, _)| r == c)
    }
}
