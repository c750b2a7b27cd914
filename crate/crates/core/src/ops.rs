// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Sparse square operators and tensor-product embedding.
//!
//! Dense operands (density matrices) are column-major `DMatrix<C64>` slices. The two
//! kernels below are the only hot loops of the full model: `A·X` gathers along CSR rows
//! inside one column of `X`, `X·A†` accumulates whole columns of `X`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::{Error, Result};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Square CSR matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMat {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMat {
    pub fn zeros(dim: usize) -> Self {
        Self { dim, row_ptr: vec![0; dim + 1], col_idx: Vec::new(), values: Vec::new() }
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_triplets(dim, (0..dim).map(|i| (i, i, ONE)))
    }

    pub fn diagonal(values: &[C64]) -> Self {
        Self::from_triplets(values.len(), values.iter().enumerate().map(|(i, &v)| (i, i, v)))
    }

    /// Duplicates are summed and exact zeros dropped.
    pub fn from_triplets(dim: usize, triplets: impl IntoIterator<Item = (usize, usize, C64)>) -> Self {
        let mut t: Vec<(usize, usize, C64)> = triplets.into_iter().collect();
        for &(r, c, _) in &t {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
        }
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut merged: Vec<(usize, usize, C64)> = Vec::with_capacity(t.len());
        for (r, c, v) in t {
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 += v,
                _ => merged.push((r, c, v)),
            }
        }
        merged.retain(|e| e.2 != ZERO);
        let mut row_ptr = vec![0; dim + 1];
        for &(r, _, _) in &merged {
            row_ptr[r + 1] += 1;
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        let col_idx = merged.iter().map(|e| e.1).collect();
        let values = merged.iter().map(|e| e.2).collect();
        Self { dim, row_ptr, col_idx, values }
    }

    pub fn from_dense(m: &DMatrix<C64>) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        let n = m.nrows();
        Self::from_triplets(n, (0..n).flat_map(|r| (0..n).map(move |c| (r, c, m[(r, c)]))))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()].iter().copied().zip(self.values[span].iter().copied())
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |r| self.row(r).map(move |(c, v)| (r, c, v)))
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.row(r).find(|&(cc, _)| cc == c).map_or(ZERO, |(_, v)| v)
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for (r, c, v) in self.triplets() {
            m[(r, c)] = v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self::from_triplets(self.dim, self.triplets().map(|(r, c, v)| (c, r, v.conj())))
    }

    pub fn scale(&self, a: C64) -> Self {
        if a == ZERO {
            return Self::zeros(self.dim);
        }
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= a);
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in add");
        Self::from_triplets(self.dim, self.triplets().chain(other.triplets()))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch in mul");
        let mut t = Vec::new();
        for r in 0..self.dim {
            for (k, a) in self.row(r) {
                for (c, b) in other.row(k) {
                    t.push((r, c, a * b));
                }
            }
        }
        Self::from_triplets(self.dim, t)
    }

    /// `self ⊗ other`, with `other` the fastest-varying factor.
    pub fn kron(&self, other: &Self) -> Self {
        let d = other.dim;
        let t = self.triplets().flat_map(|(r1, c1, a)| other.triplets().map(move |(r2, c2, b)| (r1 * d + r2, c1 * d + c2, a * b)));
        Self::from_triplets(self.dim * d, t.collect::<Vec<_>>())
    }

    pub fn hermiticity_error(&self) -> f64 {
        self.triplets().map(|(r, c, v)| (v - self.get(c, r).conj()).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn apply_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim);
        (0..self.dim).map(|r| self.row(r).map(|(c, v)| v * x[c]).sum()).collect()
    }

    /// `out += alpha · self · x`, column-major `dim × dim` operands.
    #[allow(clippy::needless_range_loop)]
    pub fn mul_dense_acc(&self, alpha: C64, x: &[C64], out: &mut [C64]) {
        let n = self.dim;
        debug_assert!(x.len() == n * n && out.len() == n * n);
        for (xc, oc) in x.chunks_exact(n).zip(out.chunks_exact_mut(n)) {
            for r in 0..n {
                let mut acc = ZERO;
                for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                    acc += self.values[k] * xc[self.col_idx[k]];
                }
                oc[r] += alpha * acc;
            }
        }
    }

    /// `out += alpha · x · self†`, column-major `dim × dim` operands.
    pub fn dense_mul_adjoint_acc(&self, alpha: C64, x: &[C64], out: &mut [C64]) {
        let n = self.dim;
        debug_assert!(x.len() == n * n && out.len() == n * n);
        for j in 0..n {
            let oc = &mut out[j * n..(j + 1) * n];
            for k in self.row_ptr[j]..self.row_ptr[j + 1] {
                let a = alpha * self.values[k].conj();
                let xc = &x[self.col_idx[k] * n..(self.col_idx[k] + 1) * n];
                for (o, &xv) in oc.iter_mut().zip(xc) {
                    *o += a * xv;
                }
            }
        }
    }
}

/// Tensor-product layout, first factor slowest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space {
    pub dims: Vec<usize>,
}

impl Space {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.contains(&0) {
            return Err(Error::InvalidInput("tensor factor of dimension zero".into()));
        }
        Ok(Self { dims })
    }

    pub fn dim(&self) -> usize {
        self.dims.iter().product()
    }

    /// `I ⊗ … ⊗ op ⊗ … ⊗ I` with `op` on factor `site`.
    pub fn embed(&self, op: &SparseMat, site: usize) -> Result<SparseMat> {
        if op.dim() != self.dims[site] {
            return Err(Error::DimensionMismatch { expected: self.dims[site], got: op.dim() });
        }
        let left: usize = self.dims[..site].iter().product();
        let right: usize = self.dims[site + 1..].iter().product();
        Ok(SparseMat::identity(left).kron(op).kron(&SparseMat::identity(right)))
    }

    /// Product of two single-site operators on different factors.
    pub fn embed_pair(&self, a: &SparseMat, i: usize, b: &SparseMat, j: usize) -> Result<SparseMat> {
        Ok(self.embed(a, i)?.mul(&self.embed(b, j)?))
    }
}

/// `|↑⟩⟨↓|` with `|↑⟩` the first basis state.
pub fn sigma_plus() -> SparseMat {
    SparseMat::from_triplets(2, [(0, 1, ONE)])
}

pub fn sigma_minus() -> SparseMat {
    SparseMat::from_triplets(2, [(1, 0, ONE)])
}

pub fn sigma_x() -> SparseMat {
    SparseMat::from_triplets(2, [(0, 1, ONE), (1, 0, ONE)])
}

pub fn sigma_y() -> SparseMat {
    SparseMat::from_triplets(2, [(0, 1, C64::new(0.0, -1.0)), (1, 0, C64::new(0.0, 1.0))])
}

pub fn sigma_z() -> SparseMat {
    SparseMat::from_triplets(2, [(0, 0, ONE), (1, 1, -ONE)])
}

/// Truncated bosonic annihilation operator on `{|0⟩ … |n_max⟩}`.
pub fn annihilation(n_max: usize) -> SparseMat {
    SparseMat::from_triplets(n_max + 1, (1..=n_max).map(|n| (n - 1, n, C64::new((n as f64).sqrt(), 0.0))))
}

pub fn number(n_max: usize) -> SparseMat {
    SparseMat::from_triplets(n_max + 1, (0..=n_max).map(|n| (n, n, C64::new(n as f64, 0.0))))
}
