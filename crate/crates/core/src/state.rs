// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Density matrices on spins ⊗ truncated Fock spaces.
//!
//! Basis convention: spin factors first (ion index ascending), then one Fock factor per
//! retained mode. `|↑⟩` is spin index 0, Fock states ascend from `|0⟩`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::ops::Space;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    /// Chain index of each spin factor.
    pub spin_ions: Vec<usize>,
    /// Mode index of each Fock factor.
    pub modes: Vec<usize>,
    /// `n_max + 1` per Fock factor.
    pub fock_dims: Vec<usize>,
}

impl Basis {
    pub fn spins_only(spin_ions: Vec<usize>) -> Self {
        Self { spin_ions, modes: Vec::new(), fock_dims: Vec::new() }
    }

    pub fn n_spins(&self) -> usize {
        self.spin_ions.len()
    }

    pub fn spin_dim(&self) -> usize {
        1 << self.n_spins()
    }

    pub fn fock_dim(&self) -> usize {
        self.fock_dims.iter().product()
    }

    pub fn dim(&self) -> usize {
        self.spin_dim() * self.fock_dim()
    }

    pub fn space(&self) -> Space {
        let mut dims = vec![2; self.n_spins()];
        dims.extend(&self.fock_dims);
        Space { dims }
    }

    /// Factor position of the `k`-th retained mode.
    pub fn mode_site(&self, k: usize) -> usize {
        self.n_spins() + k
    }

    /// Fock occupation of every retained mode for a full-space basis index.
    pub fn fock_numbers(&self, index: usize) -> Vec<usize> {
        let mut rem = index % self.fock_dim();
        let mut out = vec![0; self.fock_dims.len()];
        for k in (0..self.fock_dims.len()).rev() {
            out[k] = rem % self.fock_dims[k];
            rem /= self.fock_dims[k];
        }
        out
    }

    /// Whether spin `s` is up in a full-space basis index.
    pub fn spin_up(&self, index: usize, s: usize) -> bool {
        let spin_index = index / self.fock_dim();
        (spin_index >> (self.n_spins() - 1 - s)) & 1 == 0
    }
}

/// Ket over spins from a string of `u`/`d` (ion order).
pub fn spin_ket(pattern: &str) -> Result<DVector<C64>> {
    let n = pattern.chars().count();
    if n == 0 {
        return Err(Error::InvalidInput("empty spin pattern".into()));
    }
    let mut index = 0;
    for ch in pattern.chars() {
        let bit = match ch {
            'u' | 'U' => 0,
            'd' | 'D' => 1,
            other => return Err(Error::InvalidInput(format!("spin pattern character '{other}', expected u or d"))),
        };
        index = (index << 1) | bit;
    }
    let mut v = DVector::zeros(1 << n);
    v[index] = C64::new(1.0, 0.0);
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoSpinState {
    /// `(|↑↓⟩ − |↓↑⟩)/√2`
    PhiMinus,
    /// `(|↑↓⟩ + |↓↑⟩)/√2`
    PhiPlus,
    /// `(|↑↓⟩ − i|↓↑⟩)/√2`, reached by flip-flop exchange with J > 0.
    PsiB,
}

impl TwoSpinState {
    pub fn ket(self) -> DVector<C64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let second = match self {
            TwoSpinState::PhiMinus => C64::new(-s, 0.0),
            TwoSpinState::PhiPlus => C64::new(s, 0.0),
            TwoSpinState::PsiB => C64::new(0.0, -s),
        };
        DVector::from_vec(vec![C64::new(0.0, 0.0), C64::new(s, 0.0), second, C64::new(0.0, 0.0)])
    }
}

/// Truncated thermal distribution, renormalised on `{0 … n_max}`.
pub fn thermal_populations(nbar: f64, n_max: usize) -> Vec<f64> {
    if nbar <= 0.0 {
        let mut p = vec![0.0; n_max + 1];
        p[0] = 1.0;
        return p;
    }
    let q = nbar / (1.0 + nbar);
    let raw: Vec<f64> = (0..=n_max).map(|n| q.powi(n as i32)).collect();
    let z: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / z).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: DMatrix<C64>,
    pub basis: Basis,
}

impl DensityMatrix {
    pub fn new(matrix: DMatrix<C64>, basis: Basis) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch { expected: basis.dim(), got: matrix.nrows() });
        }
        Ok(Self { matrix, basis })
    }

    pub fn from_pure(psi: &DVector<C64>, basis: Basis) -> Result<Self> {
        let norm = psi.norm();
        if !(norm > 0.0) {
            return Err(Error::InvalidInput("zero state vector".into()));
        }
        let psi = psi / C64::new(norm, 0.0);
        Self::new(&psi * psi.adjoint(), basis)
    }

    /// `ρ_s ⊗ ρ_1 ⊗ …` with each Fock factor diagonal.
    pub fn product(spins: &DMatrix<C64>, fock_populations: &[Vec<f64>], basis: Basis) -> Result<Self> {
        if fock_populations.len() != basis.fock_dims.len() {
            return Err(Error::DimensionMismatch { expected: basis.fock_dims.len(), got: fock_populations.len() });
        }
        let mut m = spins.clone();
        for (p, &d) in fock_populations.iter().zip(&basis.fock_dims) {
            if p.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: p.len() });
            }
            let f = DMatrix::from_diagonal(&DVector::from_iterator(d, p.iter().map(|&x| C64::new(x, 0.0))));
            m = m.kronecker(&f);
        }
        Self::new(m, basis)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn hermiticity_error(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_part(&self) -> DMatrix<C64> {
        (&self.matrix + self.matrix.adjoint()) * C64::new(0.5, 0.0)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.hermitian_part().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues()[0]
    }

    /// Partial trace over every Fock factor.
    pub fn reduce_spins(&self) -> DensityMatrix {
        let (ds, df) = (self.basis.spin_dim(), self.basis.fock_dim());
        let m = DMatrix::from_fn(ds, ds, |a, b| (0..df).map(|f| self.matrix[(a * df + f, b * df + f)]).sum());
        DensityMatrix { matrix: m, basis: Basis::spins_only(self.basis.spin_ions.clone()) }
    }

    pub fn spin_up_population(&self, s: usize) -> f64 {
        (0..self.dim()).filter(|&i| self.basis.spin_up(i, s)).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn fock_population(&self, k: usize, n: usize) -> f64 {
        (0..self.dim()).filter(|&i| self.basis.fock_numbers(i)[k] == n).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn mean_occupation(&self, k: usize) -> f64 {
        (0..self.dim()).map(|i| self.basis.fock_numbers(i)[k] as f64 * self.matrix[(i, i)].re).sum()
    }

    /// Population of the highest retained Fock level of mode factor `k`.
    pub fn top_fock_population(&self, k: usize) -> f64 {
        self.fock_population(k, self.basis.fock_dims[k] - 1)
    }

    pub fn expectation(&self, op: &DMatrix<C64>) -> C64 {
        (&self.matrix * op).trace()
    }
}

/// `|⟨ψ|ρ|ψ⟩|` for a normalised `ψ`.
pub fn fidelity(rho: &DMatrix<C64>, psi: &DVector<C64>) -> Result<f64> {
    if psi.len() != rho.nrows() {
        return Err(Error::DimensionMismatch { expected: rho.nrows(), got: psi.len() });
    }
    Ok((psi.adjoint() * rho * psi)[(0, 0)].norm())
}

/// `½‖ρ_a − ρ_b‖₁` from the eigenvalues of the Hermitian difference.
pub fn trace_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    let d = a - b;
    let h = (&d + d.adjoint()) * C64::new(0.5, 0.0);
    Ok(0.5 * h.symmetric_eigenvalues().iter().map(|x| x.abs()).sum::<f64>())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn spin_fock_basis(n_max: usize) -> Basis {
        Basis { spin_ions: vec![0], modes: vec![0], fock_dims: vec![n_max + 1] }
    }

    #[test]
    fn index_decoding() {
        let b = Basis { spin_ions: vec![0, 2], modes: vec![2], fock_dims: vec![4] };
        assert_eq!(b.dim(), 16);
        // |↓↑, 3⟩ sits at spin index 2.
        assert_eq!(b.fock_numbers(2 * 4 + 3), vec![3]);
        assert!(!b.spin_up(11, 0) && b.spin_up(11, 1));
    }

    #[test]
    fn product_state_reduces_to_spin_factor() {
        let spins = DensityMatrix::from_pure(&spin_ket("ud").unwrap(), Basis::spins_only(vec![0, 2])).unwrap();
        let basis = Basis { spin_ions: vec![0, 2], modes: vec![2], fock_dims: vec![6] };
        let rho = DensityMatrix::product(&spins.matrix, &[thermal_populations(0.65, 5)], basis).unwrap();
        let red = rho.reduce_spins();
        assert!((&red.matrix - &spins.matrix).norm() < 1e-15);
        assert_relative_eq!(red.trace().re, 1.0, epsilon = 1e-12);
        assert_relative_eq!(rho.spin_up_population(0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(rho.spin_up_population(1), 0.0);
    }

    #[test]
    fn entangled_spin_phonon_state_reduces_to_mixture() {
        // (|↑,0⟩ + |↓,1⟩)/√2
        let b = spin_fock_basis(1);
        let mut psi = DVector::zeros(4);
        psi[0] = C64::new(1.0, 0.0);
        psi[3] = C64::new(1.0, 0.0);
        let red = DensityMatrix::from_pure(&psi, b).unwrap().reduce_spins();
        let half = DMatrix::identity(2, 2) * C64::new(0.5, 0.0);
        assert!((&red.matrix - half).norm() < 1e-15);
    }

    #[test]
    fn thermal_tail() {
        let p = thermal_populations(0.65, 40);
        let mean: f64 = p.iter().enumerate().map(|(n, x)| n as f64 * x).sum();
        assert_relative_eq!(mean, 0.65, max_relative = 1e-12);
        assert_eq!(thermal_populations(0.0, 3), vec![1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn fidelity_and_distance() {
        let basis = Basis::spins_only(vec![0, 2]);
        let psi = TwoSpinState::PhiMinus.ket();
        let rho = DensityMatrix::from_pure(&psi, basis).unwrap();
        assert_relative_eq!(fidelity(&rho.matrix, &psi).unwrap(), 1.0, epsilon = 1e-15);
        let mixed = DMatrix::identity(4, 4) * C64::new(0.25, 0.0);
        assert_relative_eq!(fidelity(&mixed, &psi).unwrap(), 0.25, epsilon = 1e-15);
        assert_relative_eq!(fidelity(&rho.matrix, &TwoSpinState::PhiPlus.ket()).unwrap(), 0.0, epsilon = 1e-15);
        let other = DensityMatrix::from_pure(&TwoSpinState::PhiPlus.ket(), Basis::spins_only(vec![0, 2])).unwrap();
        assert_relative_eq!(trace_distance(&rho.matrix, &other.matrix).unwrap(), 1.0, epsilon = 1e-12);
        assert_relative_eq!(trace_distance(&rho.matrix, &rho.matrix).unwrap(), 0.0);
    }

    #[test]
    fn spin_patterns() {
        assert_eq!(spin_ket("du").unwrap()[2], C64::new(1.0, 0.0));
        assert!(spin_ket("ux").is_err());
        assert!(spin_ket("").is_err());
    }
}
