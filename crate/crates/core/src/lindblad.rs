// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time-independent GKSL generators.
//!
//! `dρ/dt = −i H_eff ρ + i ρ H_eff† + Σ_k γ_k L_k ρ L_k†` with
//! `H_eff = H − (i/2) Σ_k γ_k L_k† L_k`.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::ops::SparseMat;
use crate::{Error, Result};

const I: C64 = C64::new(0.0, 1.0);

#[derive(Debug, Clone)]
pub struct Channel {
    pub op: SparseMat,
    pub rate: f64,
    pub label: String,
}

impl Channel {
    pub fn new(op: SparseMat, rate: f64, label: impl Into<String>) -> Self {
        Self { op, rate, label: label.into() }
    }
}

#[derive(Debug, Clone)]
pub struct Lindbladian {
    hamiltonian: SparseMat,
    channels: Vec<Channel>,
    h_eff: SparseMat,
}

impl Lindbladian {
    pub fn new(hamiltonian: SparseMat, channels: Vec<Channel>) -> Result<Self> {
        let dim = hamiltonian.dim();
        let herm = hamiltonian.hermiticity_error();
        if herm > 1e-12 * hamiltonian.max_abs().max(1.0) {
            return Err(Error::Unphysical(format!("Hamiltonian not Hermitian (deviation {herm:.3e})")));
        }
        for ch in &channels {
            if ch.op.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: ch.op.dim() });
            }
            if !(ch.rate >= 0.0) || !ch.rate.is_finite() {
                return Err(Error::Unphysical(format!("channel '{}' has rate {}", ch.label, ch.rate)));
            }
        }
        let channels: Vec<Channel> = channels.into_iter().filter(|c| c.rate > 0.0 && c.op.nnz() > 0).collect();
        let mut h_eff = hamiltonian.clone();
        for ch in &channels {
            let ld_l = ch.op.adjoint().mul(&ch.op);
            h_eff = h_eff.add(&ld_l.scale(C64::new(0.0, -0.5 * ch.rate)));
        }
        Ok(Self { hamiltonian, channels, h_eff })
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &SparseMat {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    /// Same dissipators, Hamiltonian `H + extra`.
    pub fn with_extra_hamiltonian(&self, extra: &SparseMat) -> Result<Self> {
        Self::new(self.hamiltonian.add(extra), self.channels.clone())
    }

    /// Combines two generators on the same space.
    pub fn plus(&self, other: &Self) -> Result<Self> {
        if other.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        let mut channels = self.channels.clone();
        channels.extend(other.channels.iter().cloned());
        Self::new(self.hamiltonian.add(&other.hamiltonian), channels)
    }

    /// `out = L(ρ)` on column-major slices, never forming the superoperator.
    pub fn apply_into(&self, rho: &[C64], out: &mut [C64], scratch: &mut Vec<C64>) {
        let n = self.dim();
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        self.h_eff.mul_dense_acc(-I, rho, out);
        self.h_eff.dense_mul_adjoint_acc(I, rho, out);
        scratch.resize(n * n, C64::new(0.0, 0.0));
        for ch in &self.channels {
            scratch.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            ch.op.mul_dense_acc(C64::new(1.0, 0.0), rho, scratch);
            ch.op.dense_mul_adjoint_acc(C64::new(ch.rate, 0.0), scratch, out);
        }
    }

    /// Same as [`apply_into`](Self::apply_into) for Hermitian `rho`. Uses `Aρ = (ρA†)†`
    /// so that every sparse product runs over contiguous columns, and returns an exactly
    /// Hermitian result, so a Hermitian state stays Hermitian under any real-coefficient
    /// integrator.
    pub fn apply_hermitian_into(&self, rho: &[C64], out: &mut [C64], scratch: &mut Vec<C64>) {
        let n = self.dim();
        let zero = C64::new(0.0, 0.0);
        scratch.resize(2 * n * n, zero);
        let (w, t) = scratch.split_at_mut(n * n);
        out.iter_mut().for_each(|z| *z = zero);
        for ch in &self.channels {
            // w = ρL†, t = w† = Lρ, out += γ t L† = γ LρL†
            w.iter_mut().for_each(|z| *z = zero);
            ch.op.dense_mul_adjoint_acc(C64::new(1.0, 0.0), rho, w);
            conj_transpose(w, t, n);
            ch.op.dense_mul_adjoint_acc(C64::new(ch.rate, 0.0), t, out);
        }
        // w = ρ H_eff†, so H_eff ρ = w†.
        w.iter_mut().for_each(|z| *z = zero);
        self.h_eff.dense_mul_adjoint_acc(C64::new(1.0, 0.0), rho, w);
        for j in 0..n {
            for i in 0..=j {
                // −i H_eff ρ + i ρ H_eff† = −i w† + i w
                let (a, b) = (out[j * n + i], out[i * n + j]);
                let v = (w[j * n + i] - w[i * n + j].conj()) * I + (a + b.conj()) * 0.5;
                if i == j {
                    out[j * n + i] = C64::new(v.re, 0.0);
                } else {
                    out[j * n + i] = v;
                    out[i * n + j] = v.conj();
                }
            }
        }
    }

    pub fn apply(&self, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        let n = self.dim();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, got: rho.nrows() });
        }
        let mut out = DMatrix::zeros(n, n);
        let mut scratch = Vec::new();
        self.apply_into(rho.as_slice(), out.as_mut_slice(), &mut scratch);
        Ok(out)
    }

    /// Dense `dim² × dim²` matrix acting on column-stacked `vec(ρ)`.
    pub fn superoperator(&self) -> DMatrix<C64> {
        let n = self.dim();
        let id = DMatrix::<C64>::identity(n, n);
        let h = self.h_eff.to_dense();
        let mut s = id.kronecker(&h) * (-I) + h.conjugate().kronecker(&id) * I;
        for ch in &self.channels {
            let l = ch.op.to_dense();
            s += l.conjugate().kronecker(&l) * C64::new(ch.rate, 0.0);
        }
        s
    }
}

fn conj_transpose(src: &[C64], dst: &mut [C64], n: usize) {
    for j in 0..n {
        for i in 0..n {
            dst[i * n + j] = src[j * n + i].conj();
        }
    }
}
