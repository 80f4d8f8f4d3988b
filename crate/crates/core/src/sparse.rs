//! Compressed-row sparse complex matrices.
//!
//! Minimal CSR implementation covering what the operator algebra and the
//! superoperator assembly need: triplet construction, matvec, Kronecker
//! products, adjoints, linear combination, and row/column selection.
//! Column indices are sorted within each row and duplicate triplets are
//! summed on construction.

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense conversion guard: matrices above this entry count stay sparse.
const DENSE_LIMIT: usize = 2_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<Complex64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        nrows: usize,
        ncols: usize,
        triplets: &[(usize, usize, Complex64)],
    ) -> Result<Self> {
        for &(r, c, _) in triplets {
            if r >= nrows || c >= ncols {
                return Err(Error::DimensionMismatch(format!(
                    "triplet ({r}, {c}) outside {nrows}x{ncols}"
                )));
            }
        }
        let mut sorted: Vec<(usize, usize, Complex64)> = triplets.to_vec();
        sorted.sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(sorted.len());
        let mut data: Vec<Complex64> = Vec::with_capacity(sorted.len());
        let mut cur_row = 0usize;
        for (r, c, v) in sorted {
            while cur_row < r {
                cur_row += 1;
                indptr[cur_row] = indices.len();
            }
            if indices.len() > indptr[cur_row] && *indices.last().unwrap() == c {
                *data.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                data.push(v);
            }
        }
        while cur_row < nrows {
            cur_row += 1;
            indptr[cur_row] = indices.len();
        }
        // drop exact zeros left by cancellation
        let mut out = Self { nrows, ncols, indptr, indices, data };
        out.prune();
        Ok(out)
    }

    fn prune(&mut self) {
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut data = Vec::with_capacity(self.data.len());
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let v = self.data[k];
                if v != Complex64::new(0.0, 0.0) {
                    indices.push(self.indices[k]);
                    data.push(v);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.data = data;
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self { nrows, ncols, indptr: vec![0; nrows + 1], indices: Vec::new(), data: Vec::new() }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            indptr: (0..=n).collect(),
            indices: (0..n).collect(),
            data: vec![Complex64::new(1.0, 0.0); n],
        }
    }

    pub fn from_diagonal(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut triplets = Vec::with_capacity(n);
        for (i, &v) in diag.iter().enumerate() {
            if v != Complex64::new(0.0, 0.0) {
                triplets.push((i, i, v));
            }
        }
        Self::from_triplets(n, n, &triplets).expect("diagonal triplets in range")
    }

    pub fn from_dense(a: &Array2<Complex64>, drop_tol: f64) -> Self {
        let (nrows, ncols) = a.dim();
        let mut triplets = Vec::new();
        for ((r, c), &v) in a.indexed_iter() {
            if v.norm() > drop_tol {
                triplets.push((r, c, v));
            }
        }
        Self::from_triplets(nrows, ncols, &triplets).expect("dense triplets in range")
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[Complex64]) {
        let lo = self.indptr[r];
        let hi = self.indptr[r + 1];
        (&self.indices[lo..hi], &self.data[lo..hi])
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        let (cols, vals) = self.row(r);
        match cols.binary_search(&c) {
            Ok(k) => vals[k],
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.nrows).flat_map(move |r| {
            let (cols, vals) = self.row(r);
            cols.iter().zip(vals.iter()).map(move |(&c, &v)| (r, c, v))
        })
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.nrows.min(self.ncols)).map(|i| self.get(i, i)).collect()
    }

    pub fn scaled(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        for v in &mut out.data {
            *v *= alpha;
        }
        out.prune();
        out
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, other: &Self, alpha: Complex64) -> Result<Self> {
        if self.nrows != other.nrows || self.ncols != other.ncols {
            return Err(Error::DimensionMismatch(format!(
                "add: {}x{} vs {}x{}",
                self.nrows, self.ncols, other.nrows, other.ncols
            )));
        }
        let mut indptr = vec![0usize; self.nrows + 1];
        let mut indices = Vec::with_capacity(self.nnz() + other.nnz());
        let mut data = Vec::with_capacity(self.nnz() + other.nnz());
        for r in 0..self.nrows {
            let (ca, va) = self.row(r);
            let (cb, vb) = other.row(r);
            let (mut i, mut j) = (0usize, 0usize);
            while i < ca.len() || j < cb.len() {
                let v;
                let c;
                if j >= cb.len() || (i < ca.len() && ca[i] < cb[j]) {
                    c = ca[i];
                    v = va[i];
                    i += 1;
                } else if i >= ca.len() || cb[j] < ca[i] {
                    c = cb[j];
                    v = alpha * vb[j];
                    j += 1;
                } else {
                    c = ca[i];
                    v = va[i] + alpha * vb[j];
                    i += 1;
                    j += 1;
                }
                if v != Complex64::new(0.0, 0.0) {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr[r + 1] = indices.len();
        }
        Ok(Self { nrows: self.nrows, ncols: self.ncols, indptr, indices, data })
    }

    pub fn transpose(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for (r, c, v) in self.triplets() {
            triplets.push((c, r, v));
        }
        Self::from_triplets(self.ncols, self.nrows, &triplets).expect("transpose in range")
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> Self {
        let mut triplets = Vec::with_capacity(self.nnz());
        for (r, c, v) in self.triplets() {
            triplets.push((c, r, v.conj()));
        }
        Self::from_triplets(self.ncols, self.nrows, &triplets).expect("dagger in range")
    }

    /// Standard Kronecker product: `(A ⊗ B)[(ia*p+ib),(ja*q+jb)] = A[ia,ja] B[ib,jb]`.
    pub fn kron(&self, other: &Self) -> Self {
        let nrows = self.nrows * other.nrows;
        let ncols = self.ncols * other.ncols;
        let mut indptr = vec![0usize; nrows + 1];
        let mut indices = Vec::with_capacity(self.nnz() * other.nnz());
        let mut data = Vec::with_capacity(self.nnz() * other.nnz());
        for ra in 0..self.nrows {
            let (ca, va) = self.row(ra);
            for rb in 0..other.nrows {
                let (cb, vb) = other.row(rb);
                for (&ja, &a) in ca.iter().zip(va.iter()) {
                    for (&jb, &b) in cb.iter().zip(vb.iter()) {
                        indices.push(ja * other.ncols + jb);
                        data.push(a * b);
                    }
                }
                indptr[ra * other.nrows + rb + 1] = indices.len();
            }
        }
        Self { nrows, ncols, indptr, indices, data }
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.nrows];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[Complex64], y: &mut [Complex64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for r in 0..self.nrows {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.data[k] * x[self.indices[k]];
            }
            y[r] = acc;
        }
    }

    /// `self · rhs` with a dense right factor.
    pub fn matmul_dense(&self, rhs: &Array2<Complex64>) -> Array2<Complex64> {
        assert_eq!(self.ncols, rhs.nrows());
        let m = rhs.ncols();
        let mut out = Array2::zeros((self.nrows, m));
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let v = self.data[k];
                let c = self.indices[k];
                for j in 0..m {
                    out[[r, j]] += v * rhs[[c, j]];
                }
            }
        }
        out
    }

    /// `lhs · self` with a dense left factor.
    pub fn rmatmul_dense(&self, lhs: &Array2<Complex64>) -> Array2<Complex64> {
        assert_eq!(lhs.ncols(), self.nrows);
        let m = lhs.nrows();
        let mut out = Array2::zeros((m, self.ncols));
        for r in 0..self.nrows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                let v = self.data[k];
                let c = self.indices[k];
                for i in 0..m {
                    out[[i, c]] += lhs[[i, r]] * v;
                }
            }
        }
        out
    }

    /// Restriction to the given (sorted) index set, rows and columns alike.
    pub fn select(&self, keep: &[usize]) -> Self {
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        let mut lookup = vec![usize::MAX; self.ncols];
        for (new, &old) in keep.iter().enumerate() {
            lookup[old] = new;
        }
        let n = keep.len();
        let mut indptr = vec![0usize; n + 1];
        let mut indices = Vec::new();
        let mut data = Vec::new();
        for (new_r, &old_r) in keep.iter().enumerate() {
            let (cols, vals) = self.row(old_r);
            for (&c, &v) in cols.iter().zip(vals.iter()) {
                if lookup[c] != usize::MAX {
                    indices.push(lookup[c]);
                    data.push(v);
                }
            }
            indptr[new_r + 1] = indices.len();
        }
        Self { nrows: n, ncols: n, indptr, indices, data }
    }

    pub fn to_dense(&self) -> Array2<Complex64> {
        assert!(
            self.nrows.saturating_mul(self.ncols) <= DENSE_LIMIT,
            "refusing to densify a {}x{} matrix",
            self.nrows,
            self.ncols
        );
        let mut out = Array2::zeros((self.nrows, self.ncols));
        for (r, c, v) in self.triplets() {
            out[[r, c]] = v;
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.nrows)
            .map(|r| self.row(r).1.iter().map(|v| v.norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if self.nrows != self.ncols {
            return false;
        }
        match self.add_scaled(&self.dagger(), Complex64::new(-1.0, 0.0)) {
            Ok(diff) => diff.max_abs() <= tol,
            Err(_) => false,
        }
    }
}
