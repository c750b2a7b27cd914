// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spin-phonon Liouvillian in the frame rotating with the Raman beat note.
//!
//! ```text
//! H = Σₖ δ̃ₖ bₖ†bₖ + Σ_{s,k} (F_{s,k} σ_s⁺ bₖ + h.c.),   F_in = (iΩ_σ/2) ηₙ M_in e^{iφᵢ}
//! ```
//!
//! Cooling enters as Lindblad channels `(bₖ, 2 Re Γₖ⁻)` and `(bₖ†, 2 Re Γₖ⁺ + 2Γ_ah)`; the
//! imaginary parts of `Γₖ±` shift `δₖ` to `δ̃ₖ`.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::cooling::{apply_anomalous_heating, CoolingRates, HeatingSpec};
use crate::crystal::{lamb_dicke, NormalModes};
use crate::lindblad::{Channel, Lindbladian};
use crate::ops::{annihilation, number, sigma_plus, SparseMat};
use crate::state::{thermal_populations, Basis};
use crate::{Error, Result};

/// Ratio |F|/|δ| above which the sideband coupling is no longer perturbative.
pub const OFF_RESONANCE_WARN: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct RamanDrive {
    /// Two-photon Rabi frequency Ω_σ (rad/s).
    pub omega_sigma: f64,
    /// Chain indices of the driven (qubit) ions.
    pub sigma_indices: Vec<usize>,
    /// Optical phase `k_σ·rᵢ` per driven ion.
    pub phases: Vec<f64>,
    /// Qubit Lamb-Dicke parameter per mode.
    pub eta_sigma: Vec<f64>,
    /// `δₙ` per mode (rad/s).
    pub detunings: Vec<f64>,
}

impl RamanDrive {
    pub fn validate(&self, modes: &NormalModes) -> Result<()> {
        if self.phases.len() != self.sigma_indices.len() {
            return Err(Error::DimensionMismatch { expected: self.sigma_indices.len(), got: self.phases.len() });
        }
        for v in [&self.eta_sigma, &self.detunings] {
            if v.len() != modes.len() {
                return Err(Error::DimensionMismatch { expected: modes.len(), got: v.len() });
            }
        }
        let n_ions = modes.mode_matrix.nrows();
        if let Some(&bad) = self.sigma_indices.iter().find(|&&i| i >= n_ions) {
            return Err(Error::InvalidInput(format!("driven ion index {bad} out of range for {n_ions} ions")));
        }
        if !self.omega_sigma.is_finite() || self.detunings.iter().chain(&self.eta_sigma).any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("drive parameters must be finite".into()));
        }
        Ok(())
    }

    /// `F_{s,n}` for driven ion `s` (position in `sigma_indices`) and mode `n`.
    pub fn coupling(&self, modes: &NormalModes, s: usize, n: usize) -> C64 {
        let amp = 0.5 * self.omega_sigma * self.eta_sigma[n] * modes.amplitude(self.sigma_indices[s], n);
        C64::new(0.0, amp) * C64::from_polar(1.0, self.phases[s])
    }

    /// Rows are driven ions, columns modes.
    pub fn coupling_matrix(&self, modes: &NormalModes) -> DMatrix<C64> {
        DMatrix::from_fn(self.sigma_indices.len(), modes.len(), |s, n| self.coupling(modes, s, n))
    }

    /// Couplings that violate `|F| < 0.1|δ|` on the given modes.
    pub fn off_resonance_violations(&self, modes: &NormalModes, mode_set: &[usize]) -> Vec<String> {
        let mut out = Vec::new();
        for &n in mode_set {
            for s in 0..self.sigma_indices.len() {
                let f = self.coupling(modes, s, n).norm();
                if f >= OFF_RESONANCE_WARN * self.detunings[n].abs() {
                    out.push(format!(
                        "ion {} mode {}: |F| = {:.3e} rad/s is not small against |delta| = {:.3e} rad/s",
                        self.sigma_indices[s],
                        n + 1,
                        f,
                        self.detunings[n].abs()
                    ));
                }
            }
        }
        out
    }
}

/// Phases `0, pπ` for two driven ions separated by `pπ/|k_σ|`.
pub fn parity_phases(n_sigma: usize, parity: i64) -> Vec<f64> {
    (0..n_sigma).map(|s| (s as f64) * (parity as f64) * std::f64::consts::PI).collect()
}

/// Per-mode detunings of a single Raman beat note placed `delta_target` from mode `target`.
pub fn single_note_detunings(modes: &NormalModes, target: usize, delta_target: f64) -> Vec<f64> {
    let w_t = modes.frequencies[target];
    modes.frequencies.iter().map(|&w| delta_target + (w - w_t)).collect()
}

/// Qubit Lamb-Dicke parameters per mode given the value on mode `reference`.
pub fn eta_from_reference(modes: &NormalModes, qubit_mass: f64, reference: usize, eta_ref: f64) -> Vec<f64> {
    let k = crate::crystal::wavevector_for_lamb_dicke(eta_ref, qubit_mass, modes.frequencies[reference]);
    modes.frequencies.iter().map(|&w| lamb_dicke(k, 1.0, qubit_mass, w)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockCutoff {
    pub retained: Vec<usize>,
    pub n_max: Vec<usize>,
    pub leak_threshold: f64,
}

pub const DEFAULT_LEAK_THRESHOLD: f64 = 1e-6;

impl FockCutoff {
    pub fn new(retained: Vec<usize>, n_max: Vec<usize>, leak_threshold: f64) -> Result<Self> {
        if retained.len() != n_max.len() {
            return Err(Error::DimensionMismatch { expected: retained.len(), got: n_max.len() });
        }
        if n_max.iter().any(|&n| n < 1) {
            return Err(Error::InvalidInput("n_max must be at least 1".into()));
        }
        if !(leak_threshold > 0.0) {
            return Err(Error::InvalidInput("leak threshold must be positive".into()));
        }
        let mut sorted = retained.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != retained.len() {
            return Err(Error::InvalidInput("retained modes must be distinct".into()));
        }
        Ok(Self { retained, n_max, leak_threshold })
    }

    /// Modes within `5×` the smallest `|δₙ|`.
    pub fn default_retained(detunings: &[f64]) -> Vec<usize> {
        let min = detunings.iter().map(|d| d.abs()).fold(f64::INFINITY, f64::min);
        (0..detunings.len()).filter(|&n| detunings[n].abs() <= 5.0 * min).collect()
    }

    /// Smallest cutoff whose truncated thermal state at `nbar` keeps the top level a
    /// decade below `leak_threshold`.
    pub fn auto_n_max(nbar: f64, leak_threshold: f64) -> usize {
        (1..=200).find(|&n| *thermal_populations(nbar, n).last().unwrap() < 0.1 * leak_threshold).unwrap_or(200)
    }

    pub fn basis(&self, sigma_indices: &[usize]) -> Basis {
        Basis { spin_ions: sigma_indices.to_vec(), modes: self.retained.clone(), fock_dims: self.n_max.iter().map(|n| n + 1).collect() }
    }
}

/// `H_RF` with bare detunings `δₙ`.
pub fn build_hamiltonian_rf(drive: &RamanDrive, modes: &NormalModes, cutoff: &FockCutoff) -> Result<SparseMat> {
    drive.validate(modes)?;
    let basis = cutoff.basis(&drive.sigma_indices);
    let space = basis.space();
    let mut h = SparseMat::zeros(basis.dim());
    for (k, &n) in cutoff.retained.iter().enumerate() {
        if n >= modes.len() {
            return Err(Error::InvalidInput(format!("retained mode {} does not exist", n + 1)));
        }
        let site = basis.mode_site(k);
        let a = space.embed(&annihilation(cutoff.n_max[k]), site)?;
        h = h.add(&space.embed(&number(cutoff.n_max[k]), site)?.scale(C64::new(drive.detunings[n], 0.0)));
        for s in 0..drive.sigma_indices.len() {
            let f = drive.coupling(modes, s, n);
            let term = space.embed(&sigma_plus(), s)?.mul(&a).scale(f);
            h = h.add(&term).add(&term.adjoint());
        }
    }
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct Dissipator {
    pub channels: Vec<Channel>,
    /// `Σₖ Im(Γₖ⁺ + Γₖ⁻) bₖ†bₖ`.
    pub lamb_shift: SparseMat,
}

/// Channels for the retained modes; `rates` are the bare laser rates.
pub fn build_dissipator(rates: &CoolingRates, heating: &HeatingSpec, cutoff: &FockCutoff, basis: &Basis) -> Result<Dissipator> {
    let heated = apply_anomalous_heating(rates, heating)?;
    let space = basis.space();
    let mut channels = Vec::new();
    let mut lamb_shift = SparseMat::zeros(basis.dim());
    for (k, &n) in cutoff.retained.iter().enumerate() {
        let m = heated.modes.get(n).ok_or_else(|| Error::InvalidInput(format!("no cooling rates for mode {}", n + 1)))?;
        if m.gamma_minus.re < 0.0 || m.gamma_plus.re < 0.0 {
            return Err(Error::Unphysical(format!("negative cooling/heating rate on mode {}", n + 1)));
        }
        let site = basis.mode_site(k);
        let a = space.embed(&annihilation(cutoff.n_max[k]), site)?;
        channels.push(Channel::new(a.clone(), 2.0 * m.gamma_minus.re, format!("cool mode {}", n + 1)));
        channels.push(Channel::new(a.adjoint(), 2.0 * m.gamma_plus.re, format!("heat mode {}", n + 1)));
        lamb_shift = lamb_shift.add(&space.embed(&number(cutoff.n_max[k]), site)?.scale(C64::new(m.lamb_shift(), 0.0)));
    }
    Ok(Dissipator { channels, lamb_shift })
}

/// `H ⊗ I_ph` and `L ⊗ I_ph` for a generator acting on the spin factors only.
pub fn embed_spin_generator(spin: &Lindbladian, basis: &Basis) -> Result<Lindbladian> {
    if spin.dim() != basis.spin_dim() {
        return Err(Error::DimensionMismatch { expected: basis.spin_dim(), got: spin.dim() });
    }
    let id = SparseMat::identity(basis.fock_dim());
    let channels = spin.channels().iter().map(|c| Channel::new(c.op.kron(&id), c.rate, c.label.clone())).collect();
    Lindbladian::new(spin.hamiltonian().kron(&id), channels)
}

#[derive(Debug, Clone)]
pub struct SpinPhononLiouvillian {
    pub generator: Lindbladian,
    pub basis: Basis,
    pub lamb_shift: SparseMat,
    pub warnings: Vec<String>,
}

impl SpinPhononLiouvillian {
    /// `spectators` carries the spin-only contribution of modes left out of the Fock
    /// space, on the spin factors of `basis`.
    pub fn build(
        drive: &RamanDrive,
        modes: &NormalModes,
        rates: &CoolingRates,
        heating: &HeatingSpec,
        cutoff: &FockCutoff,
        spectators: Option<&Lindbladian>,
    ) -> Result<Self> {
        let basis = cutoff.basis(&drive.sigma_indices);
        let h = build_hamiltonian_rf(drive, modes, cutoff)?;
        let diss = build_dissipator(rates, heating, cutoff, &basis)?;
        let mut generator = Lindbladian::new(h.add(&diss.lamb_shift), diss.channels)?;
        if let Some(spec) = spectators {
            generator = generator.plus(&embed_spin_generator(spec, &basis)?)?;
        }
        let warnings = drive.off_resonance_violations(modes, &cutoff.retained);
        for w in &warnings {
            warn!("{w}");
        }
        Ok(Self { generator, basis, lamb_shift: diss.lamb_shift, warnings })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cooling::ModeRates;
    use crate::state::DensityMatrix;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;

    fn one_mode(freq: f64, amps: &[f64]) -> NormalModes {
        NormalModes { frequencies: vec![freq], mode_matrix: DMatrix::from_column_slice(amps.len(), 1, amps) }
    }

    fn drive_1x1(f: f64, delta: f64) -> RamanDrive {
        // F = i Ω η / 2 with unit amplitude; phase −π/2 makes F real.
        RamanDrive { omega_sigma: 2.0 * f, sigma_indices: vec![0], phases: vec![-std::f64::consts::FRAC_PI_2], eta_sigma: vec![1.0], detunings: vec![delta] }
    }

    fn rates(gm: f64, gp: f64) -> CoolingRates {
        CoolingRates { modes: vec![ModeRates { gamma_plus: C64::new(gp, 0.0), gamma_minus: C64::new(gm, 0.0), anomalous_heating: 0.0 }] }
    }

    #[test]
    fn zero_drive_leaves_mode_energies() {
        let modes = one_mode(10.0, &[1.0]);
        let cutoff = FockCutoff::new(vec![0], vec![4], 1e-6).unwrap();
        let h = build_hamiltonian_rf(&drive_1x1(0.0, 0.3), &modes, &cutoff).unwrap().to_dense();
        for i in 0..10 {
            let n = (i % 5) as f64;
            assert_relative_eq!(h[(i, i)].re, 0.3 * n, epsilon = 1e-15);
        }
        assert_eq!(h.iter().filter(|z| z.norm() > 0.0).count(), 8);
    }

    #[test]
    fn sideband_matrix_elements_scale_with_root_n() {
        let modes = one_mode(10.0, &[1.0]);
        let cutoff = FockCutoff::new(vec![0], vec![4], 1e-6).unwrap();
        let f = 0.05;
        let h = build_hamiltonian_rf(&drive_1x1(f, 0.3), &modes, &cutoff).unwrap();
        // ⟨↑, n−1| H |↓, n⟩ with |↑,m⟩ = m, |↓,n⟩ = 5 + n.
        for n in 1..=4 {
            let z = h.get(n - 1, 5 + n);
            assert_relative_eq!(z.re, f * (n as f64).sqrt(), epsilon = 1e-15);
            assert!(z.im.abs() < 1e-15);
        }
        assert!(h.hermiticity_error() < 1e-15);
    }

    #[test]
    fn parity_fixes_the_relative_sign() {
        let modes = one_mode(10.0, &[0.4, 0.4]);
        for p in [0i64, 1, 2, 3] {
            let drive = RamanDrive { omega_sigma: 1.0, sigma_indices: vec![0, 1], phases: parity_phases(2, p), eta_sigma: vec![0.1], detunings: vec![0.3] };
            let prod = drive.coupling(&modes, 0, 0) * drive.coupling(&modes, 1, 0).conj();
            assert!(prod.im.abs() < 1e-15);
            assert_eq!(prod.re > 0.0, p % 2 == 0);
        }
    }

    #[test]
    fn damped_oscillator_fixed_point_is_thermal() {
        let (gm, gp) = (3.0, 1.0);
        let nbar = gp / (gm - gp);
        let modes = one_mode(10.0, &[1.0]);
        let n_max = 40;
        let cutoff = FockCutoff::new(vec![0], vec![n_max], 1e-6).unwrap();
        let model = SpinPhononLiouvillian::build(&drive_1x1(0.0, 0.3), &modes, &rates(gm, gp), &HeatingSpec::none(1), &cutoff, None).unwrap();
        // Truncated detailed balance is exact on the retained ladder.
        let spin = DMatrix::from_diagonal_element(2, 2, C64::new(0.5, 0.0));
        let rho = DensityMatrix::product(&spin, &[thermal_populations(nbar, n_max)], model.basis.clone()).unwrap();
        let d = model.generator.apply(&rho.matrix).unwrap();
        assert!(d.iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
        assert_relative_eq!(rho.mean_occupation(0), nbar, max_relative = 1e-10);
    }

    #[test]
    fn heating_is_added_to_the_raising_channel() {
        let modes = one_mode(10.0, &[1.0]);
        let cutoff = FockCutoff::new(vec![0], vec![3], 1e-6).unwrap();
        let basis = cutoff.basis(&[0]);
        let d = build_dissipator(&rates(2.0, 0.5), &HeatingSpec::uniform(0.25, 1), &cutoff, &basis).unwrap();
        assert_relative_eq!(d.channels[0].rate, 4.0);
        assert_relative_eq!(d.channels[1].rate, 1.5);
        let _ = modes;
    }

    #[test]
    fn lamb_shift_enters_the_hamiltonian() {
        let modes = one_mode(10.0, &[1.0]);
        let cutoff = FockCutoff::new(vec![0], vec![2], 1e-6).unwrap();
        let r = CoolingRates { modes: vec![ModeRates { gamma_plus: C64::new(0.1, -0.2), gamma_minus: C64::new(0.3, -0.5), anomalous_heating: 0.0 }] };
        let model = SpinPhononLiouvillian::build(&drive_1x1(0.0, 1.0), &modes, &r, &HeatingSpec::none(1), &cutoff, None).unwrap();
        // |↑, 1⟩ has energy δ̃ = 1 − 0.7.
        assert_relative_eq!(model.generator.hamiltonian().get(1, 1).re, 0.3, epsilon = 1e-15);
    }

    #[test]
    fn retained_modes_and_cutoff() {
        assert_eq!(FockCutoff::default_retained(&[-6.2, -3.2, -0.3]), vec![2]);
        assert_eq!(FockCutoff::default_retained(&[1.0, 4.9, -30.0]), vec![0, 1]);
        let n = FockCutoff::auto_n_max(0.65, 1e-6);
        assert!(*thermal_populations(0.65, n).last().unwrap() < 1e-7);
        assert!(*thermal_populations(0.65, n - 1).last().unwrap() >= 1e-7);
        assert!(FockCutoff::new(vec![0], vec![0], 1e-6).is_err());
    }
}
