// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin-only generators after adiabatic elimination of damped phonons.
//!
//! Per mode `n`, with `Dₙ = δ̃ₙ² + Wₙ²`:
//!
//! ```text
//! J_ij  = −Σₙ F_in F_jn* δ̃ₙ / Dₙ          B_in = −|F_in|² δ̃ₙ (2n̄ₙ + 1) / Dₙ
//! Γ_ij  =  Σₙ F_in F_jn* Wₙ / Dₙ          Γ'_ij = Σₙ F_in F_jn* Wₙ n̄ₙ / Dₙ
//! ```
//!
//! The dissipator has Kossakowski matrix `2(Γ + Γ')` on `{σᵢ⁻}` and `2Γ'` on `{σᵢ⁺}`.
//! Under a strong transverse drive the same elimination gives an Ising model with
//! collective σˣ dephasing.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::cooling::CoolingRates;
use crate::crystal::NormalModes;
use crate::fullmodel::RamanDrive;
use crate::lindblad::{Channel, Lindbladian};
use crate::ops::{sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z, Space, SparseMat};
use crate::{Error, Result};

/// Relative size below which negative Kossakowski eigenvalues are treated as round-off.
pub const KOSSAKOWSKI_CLIP: f64 = 1e-10;

const STRONG_DRIVE_WARN: f64 = 0.1;
const DRESSING_WARN: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveSpinModel {
    pub j: DMatrix<C64>,
    /// `B_in` per driven ion (rows) and mode (columns); zero for modes not included.
    pub b_per_mode: DMatrix<f64>,
    pub gamma: DMatrix<C64>,
    pub gamma_prime: DMatrix<C64>,
}

impl EffectiveSpinModel {
    pub fn zeros(n_spins: usize, n_modes: usize) -> Self {
        Self {
            j: DMatrix::zeros(n_spins, n_spins),
            b_per_mode: DMatrix::zeros(n_spins, n_modes),
            gamma: DMatrix::zeros(n_spins, n_spins),
            gamma_prime: DMatrix::zeros(n_spins, n_spins),
        }
    }

    pub fn n_spins(&self) -> usize {
        self.j.nrows()
    }

    /// `Σₙ B_in`.
    pub fn b(&self) -> Vec<f64> {
        self.b_per_mode.row_iter().map(|r| r.sum()).collect()
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self {
            j: &self.j + &other.j,
            b_per_mode: &self.b_per_mode + &other.b_per_mode,
            gamma: &self.gamma + &other.gamma,
            gamma_prime: &self.gamma_prime + &other.gamma_prime,
        }
    }
}

fn denominators(rates: &CoolingRates, drive: &RamanDrive, n: usize) -> Result<(f64, f64, f64)> {
    let m = rates.modes.get(n).ok_or_else(|| Error::InvalidInput(format!("no cooling rates for mode {}", n + 1)))?;
    let (w, dt) = (m.w(), m.shifted_detuning(drive.detunings[n]));
    let d = dt * dt + w * w;
    if d == 0.0 {
        return Err(Error::Singular { mode: n });
    }
    Ok((w, dt, d))
}

/// Full set of effective parameters from the modes in `mode_set`, each of which must be
/// net-cooled.
pub fn sw_flipflop_params(drive: &RamanDrive, rates: &CoolingRates, modes: &NormalModes, mode_set: &[usize]) -> Result<EffectiveSpinModel> {
    drive.validate(modes)?;
    let ns = drive.sigma_indices.len();
    let f = drive.coupling_matrix(modes);
    let mut out = EffectiveSpinModel::zeros(ns, modes.len());
    for &n in mode_set {
        let (w, dt, d) = denominators(rates, drive, n)?;
        let nbar = rates.nbar(n).ok_or(Error::NetHeating { mode: n, w })?;
        for i in 0..ns {
            for j in 0..ns {
                let ff = f[(i, n)] * f[(j, n)].conj();
                out.j[(i, j)] -= ff * (dt / d);
                out.gamma[(i, j)] += ff * (w / d);
                out.gamma_prime[(i, j)] += ff * (w * nbar / d);
            }
            out.b_per_mode[(i, n)] = -f[(i, n)].norm_sqr() * dt * (2.0 * nbar + 1.0) / d;
        }
    }
    Ok(out)
}

/// Coherent exchange `−Σₙ F_in F_jn*/δ̃ₙ` through modes that are not net-cooled; their
/// dissipative and thermal contributions are not defined and are left out.
pub fn virtual_exchange(drive: &RamanDrive, rates: &CoolingRates, modes: &NormalModes, mode_set: &[usize]) -> Result<EffectiveSpinModel> {
    drive.validate(modes)?;
    let ns = drive.sigma_indices.len();
    let f = drive.coupling_matrix(modes);
    let mut out = EffectiveSpinModel::zeros(ns, modes.len());
    for &n in mode_set {
        let dt = rates.modes[n].shifted_detuning(drive.detunings[n]);
        if dt == 0.0 {
            return Err(Error::Resonant { mode: n });
        }
        for i in 0..ns {
            for j in 0..ns {
                if i != j {
                    out.j[(i, j)] -= f[(i, n)] * f[(j, n)].conj() / dt;
                }
            }
        }
    }
    Ok(out)
}

/// Spin-only contribution of modes outside the Fock space: cooled modes give the
/// full effective terms, the rest only exchange.
pub fn spectator_model(drive: &RamanDrive, rates: &CoolingRates, modes: &NormalModes, spectators: &[usize]) -> Result<(EffectiveSpinModel, Vec<String>)> {
    let (cooled, hot): (Vec<usize>, Vec<usize>) = spectators.iter().partition(|&&n| rates.modes[n].is_cooled());
    let mut warnings = Vec::new();
    for &n in &hot {
        let msg = format!("mode {} is not net-cooled (W = {:.3e} rad/s); only its coherent exchange is kept", n + 1, rates.w(n));
        warn!("{msg}");
        warnings.push(msg);
    }
    let model = sw_flipflop_params(drive, rates, modes, &cooled)?.plus(&virtual_exchange(drive, rates, modes, &hot)?);
    Ok((model, warnings))
}

fn spin_space(n: usize) -> Space {
    Space { dims: vec![2; n] }
}

/// Lindblad channels for `Σ_ij a_ij (A_i ρ A_j† − ½{A_j†A_i, ρ})`.
pub fn kossakowski_channels(a: &DMatrix<C64>, ops: &[SparseMat], label: &str) -> Result<Vec<Channel>> {
    let herm = (a - a.adjoint()).norm();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(Vec::new());
    }
    if herm > 1e-12 * scale {
        return Err(Error::Unphysical(format!("{label} coefficient matrix is not Hermitian")));
    }
    let h = (a + a.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut channels = Vec::new();
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda < -KOSSAKOWSKI_CLIP * lmax.max(scale) {
            return Err(Error::Unphysical(format!("{label} coefficient matrix has eigenvalue {lambda:.3e}")));
        }
        if lambda <= KOSSAKOWSKI_CLIP * lmax {
            continue;
        }
        let u = eig.eigenvectors.column(k);
        let mut op = SparseMat::zeros(ops[0].dim());
        for (i, a_i) in ops.iter().enumerate() {
            op = op.add(&a_i.scale(u[i]));
        }
        channels.push(Channel::new(op, lambda, format!("{label} {k}")));
    }
    Ok(channels)
}

pub fn flipflop_hamiltonian(model: &EffectiveSpinModel) -> Result<SparseMat> {
    let ns = model.n_spins();
    let space = spin_space(ns);
    let mut h = SparseMat::zeros(space.dim());
    for i in 0..ns {
        for j in 0..i {
            let term = space.embed_pair(&sigma_plus(), i, &sigma_minus(), j)?.scale(model.j[(i, j)]);
            h = h.add(&term).add(&term.adjoint());
        }
    }
    for (i, b) in model.b().into_iter().enumerate() {
        h = h.add(&space.embed(&sigma_z(), i)?.scale(C64::new(0.5 * b, 0.0)));
    }
    Ok(h)
}

pub fn build_effective_liouvillian(model: &EffectiveSpinModel) -> Result<Lindbladian> {
    let ns = model.n_spins();
    let space = spin_space(ns);
    let lowering: Vec<SparseMat> = (0..ns).map(|i| space.embed(&sigma_minus(), i)).collect::<Result<_>>()?;
    let raising: Vec<SparseMat> = (0..ns).map(|i| space.embed(&sigma_plus(), i)).collect::<Result<_>>()?;
    let two = C64::new(2.0, 0.0);
    let mut channels = kossakowski_channels(&((&model.gamma + &model.gamma_prime) * two), &lowering, "collective decay")?;
    channels.extend(kossakowski_channels(&(&model.gamma_prime * two), &raising, "collective excitation")?);
    Lindbladian::new(flipflop_hamiltonian(model)?, channels)
}

#[derive(Debug, Clone)]
pub struct CollectiveJumps {
    pub l_minus: SparseMat,
    pub l_plus: SparseMat,
    pub parity: i64,
}

/// `L₋ = √(Γ_eff(n̄+1))(σ₁⁻ + (−1)^p σ₃⁻)`, `L₊ = √(Γ_eff n̄)(σ₁⁺ + (−1)^p σ₃⁺)` for two
/// spins with `Γ₁₁ = Γ₃₃`.
pub fn collective_jump_operators(model: &EffectiveSpinModel, parity: i64, nbar: f64) -> Result<CollectiveJumps> {
    if model.n_spins() != 2 {
        return Err(Error::InvalidInput("collective jumps need exactly two spins".into()));
    }
    let g = &model.gamma;
    let (g11, g33) = (g[(0, 0)].re, g[(1, 1)].re);
    let sign = if parity.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let tol = 1e-9 * g11.abs().max(g33.abs()).max(f64::MIN_POSITIVE);
    if (g11 - g33).abs() > tol || (g[(0, 1)] - C64::new(sign * g11, 0.0)).norm() > tol {
        return Err(Error::InvalidInput("collective jumps need Γ11 = Γ33 = (−1)^p Γ13".into()));
    }
    if nbar < 0.0 {
        return Err(Error::InvalidInput("negative occupation".into()));
    }
    let space = spin_space(2);
    let s = C64::new(sign, 0.0);
    let lower = space.embed(&sigma_minus(), 0)?.add(&space.embed(&sigma_minus(), 1)?.scale(s));
    let raise = space.embed(&sigma_plus(), 0)?.add(&space.embed(&sigma_plus(), 1)?.scale(s));
    Ok(CollectiveJumps { l_minus: lower.scale(C64::new((g11 * (nbar + 1.0)).sqrt(), 0.0)), l_plus: raise.scale(C64::new((g11 * nbar).sqrt(), 0.0)), parity })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DressedNoise {
    /// `Ω̃_d` per driven ion (rad/s).
    pub omega: Vec<f64>,
    /// `Γ̃_d` (rad/s).
    pub gamma: f64,
}

/// `Ω̃_d,j = (Σₙ B_jn δ̃ₙ τ_c + Γ_d)/(2Ω_d τ_c)`, `Γ̃_d = Γ_d/(Ω_d τ_c)²`.
pub fn dressed_noise_params(b_per_mode: &DMatrix<f64>, delta_tilde: &[f64], tau_c: f64, gamma_d: f64, omega_d: f64) -> Result<DressedNoise> {
    if b_per_mode.ncols() != delta_tilde.len() {
        return Err(Error::DimensionMismatch { expected: b_per_mode.ncols(), got: delta_tilde.len() });
    }
    if !(tau_c > 0.0) || !(omega_d > 0.0) || !(gamma_d >= 0.0) {
        return Err(Error::InvalidInput("dressing needs tau_c > 0, Omega_d > 0, Gamma_d >= 0".into()));
    }
    let x = omega_d * tau_c;
    if x < DRESSING_WARN {
        warn!("Omega_d tau_c = {x:.3} is not large; dressed noise rates are unreliable");
    }
    let omega = b_per_mode
        .row_iter()
        .map(|row| {
            let shift: f64 = row.iter().zip(delta_tilde).map(|(b, d)| b * d * tau_c).sum();
            (shift + gamma_d) / (2.0 * x)
        })
        .collect();
    Ok(DressedNoise { omega, gamma: gamma_d / (x * x) })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DrivenIsingModel {
    pub jt: DMatrix<f64>,
    pub gt: DMatrix<f64>,
    pub omega_d: f64,
    pub dressed: Option<DressedNoise>,
}

/// `J̃_ij = −Σₙ |F_in F_jn| δ̃ₙ/(2Dₙ)`, `Γ̃_ij = Σₙ |F_in F_jn| Wₙ(n̄ₙ + ½)/(2Dₙ)`.
pub fn sw_ising_params(drive: &RamanDrive, rates: &CoolingRates, modes: &NormalModes, mode_set: &[usize], omega_d: f64) -> Result<DrivenIsingModel> {
    drive.validate(modes)?;
    let ns = drive.sigma_indices.len();
    let f = drive.coupling_matrix(modes);
    let mut jt = DMatrix::zeros(ns, ns);
    let mut gt = DMatrix::zeros(ns, ns);
    for &n in mode_set {
        let (w, dt, d) = denominators(rates, drive, n)?;
        let nbar = rates.nbar(n).ok_or(Error::NetHeating { mode: n, w })?;
        if w.abs().max(dt.abs()) > STRONG_DRIVE_WARN * omega_d {
            warn!("mode {}: Omega_d does not dominate W and the shifted detuning", n + 1);
        }
        for i in 0..ns {
            for j in 0..ns {
                let ff = f[(i, n)].norm() * f[(j, n)].norm();
                jt[(i, j)] -= ff * dt / (2.0 * d);
                gt[(i, j)] += ff * w * (nbar + 0.5) / (2.0 * d);
            }
        }
    }
    Ok(DrivenIsingModel { jt, gt, omega_d, dressed: None })
}

pub fn ising_hamiltonian(model: &DrivenIsingModel) -> Result<SparseMat> {
    let ns = model.jt.nrows();
    let space = spin_space(ns);
    let mut h = SparseMat::zeros(space.dim());
    for i in 0..ns {
        for j in 0..i {
            h = h.add(&space.embed_pair(&sigma_x(), i, &sigma_x(), j)?.scale(C64::new(model.jt[(i, j)], 0.0)));
        }
        let extra = model.dressed.as_ref().map_or(0.0, |d| d.omega[i]);
        h = h.add(&space.embed(&sigma_x(), i)?.scale(C64::new(0.5 * (model.omega_d + extra), 0.0)));
    }
    Ok(h)
}

/// `H̃ + H̃_n` with collective σˣ dephasing and, when dressed noise is attached, local
/// σʸ, σᶻ dephasing at Lindblad rate `½Γ̃_d`.
pub fn build_ising_liouvillian(model: &DrivenIsingModel) -> Result<Lindbladian> {
    let ns = model.jt.nrows();
    let space = spin_space(ns);
    let xs: Vec<SparseMat> = (0..ns).map(|i| space.embed(&sigma_x(), i)).collect::<Result<_>>()?;
    let a = model.gt.map(|g| C64::new(2.0 * g, 0.0));
    let mut channels = kossakowski_channels(&a, &xs, "collective dephasing")?;
    if let Some(d) = &model.dressed {
        for i in 0..ns {
            channels.push(Channel::new(space.embed(&sigma_y(), i)?, 0.5 * d.gamma, format!("dressed y {i}")));
            channels.push(Channel::new(space.embed(&sigma_z(), i)?, 0.5 * d.gamma, format!("dressed z {i}")));
        }
    }
    Lindbladian::new(ising_hamiltonian(model)?, channels)
}
