// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Sympathetic Doppler cooling of the axial modes.
//!
//! For every mode the coolant ions produce complex rates
//!
//! ```text
//! Γ⁻ₙ = Σ_l (½ Ω_τ η_τn M_ln)² / (½Γ_τ + i(−Δ_τ − ωₙ))     (cooling)
//! Γ⁺ₙ = Σ_l (½ Ω_τ η_τn M_ln)² / (½Γ_τ + i(−Δ_τ + ωₙ))     (heating)
//! ```
//!
//! so a red-detuned laser (Δ_τ < 0) cools, with the sideband resonance at Δ_τ = −ωₙ.
//! The net rate is `Wₙ = Re(Γ⁻ₙ − Γ⁺ₙ)`, the occupation `n̄ₙ = Re Γ⁺ₙ / Wₙ` and the mode
//! frequencies pick up the shift `Im(Γ⁺ₙ − (Γ⁻ₙ)*)`.
//!
//! Under the Lindblad construction used by [`crate::fullmodel`], `⟨b†b⟩` relaxes at `2Wₙ`.

use num_complex::Complex64 as C64;

use crate::crystal::{lamb_dicke, IonChain, NormalModes, Role};
use crate::{Error, Result};

/// Coolant transition wavelength of ²⁴Mg⁺ (3S½ ↔ 3P½), in meters.
pub const MG24_COOLING_WAVELENGTH: f64 = 280.3e-9;

#[derive(Debug, Clone)]
pub struct CoolingLaser {
    /// Standing-wave Rabi frequency Ω_τ (rad/s).
    pub omega_tau: f64,
    /// Detuning Δ_τ (rad/s); negative is red.
    pub delta_tau: f64,
    /// Linewidth Γ_τ of the coolant transition (rad/s).
    pub gamma_tau: f64,
    /// Lamb-Dicke parameter of the coolant for every mode.
    pub eta_tau: Vec<f64>,
    pub coolant_indices: Vec<usize>,
}

impl CoolingLaser {
    /// Derives η_τ per mode from the coolant wavelength, the beam projection onto the
    /// axis and the coolant mass.
    pub fn from_wavelength(
        chain: &IonChain,
        modes: &NormalModes,
        wavelength: f64,
        projection: f64,
        omega_tau: f64,
        delta_tau: f64,
        gamma_tau: f64,
    ) -> Result<Self> {
        let coolant_indices = chain.indices_with_role(Role::Coolant);
        let &first = coolant_indices.first().ok_or_else(|| Error::InvalidInput("chain has no coolant ion".into()))?;
        if !(wavelength > 0.0) {
            return Err(Error::InvalidInput("cooling wavelength must be positive".into()));
        }
        let k = 2.0 * std::f64::consts::PI / wavelength;
        let mass = chain.ions[first].mass;
        let eta_tau = modes.frequencies.iter().map(|&w| lamb_dicke(k, projection, mass, w)).collect();
        let laser = Self { omega_tau, delta_tau, gamma_tau, eta_tau, coolant_indices };
        laser.validate(modes)?;
        Ok(laser)
    }

    pub fn validate(&self, modes: &NormalModes) -> Result<()> {
        if !(self.gamma_tau > 0.0) {
            return Err(Error::InvalidInput("coolant linewidth must be positive".into()));
        }
        if self.eta_tau.len() != modes.len() {
            return Err(Error::DimensionMismatch { expected: modes.len(), got: self.eta_tau.len() });
        }
        if self.eta_tau.iter().any(|e| !e.is_finite()) || !self.omega_tau.is_finite() || !self.delta_tau.is_finite() {
            return Err(Error::InvalidInput("cooling parameters must be finite".into()));
        }
        let n_ions = modes.mode_matrix.nrows();
        if let Some(&bad) = self.coolant_indices.iter().find(|&&l| l >= n_ions) {
            return Err(Error::InvalidInput(format!("coolant index {bad} out of range for {n_ions} ions")));
        }
        Ok(())
    }
}

/// Anomalous heating, phonons per second on every mode.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct HeatingSpec {
    pub per_mode: Vec<f64>,
}

impl HeatingSpec {
    pub fn uniform(rate: f64, n_modes: usize) -> Self {
        Self { per_mode: vec![rate; n_modes] }
    }

    pub fn none(n_modes: usize) -> Self {
        Self::uniform(0.0, n_modes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeRates {
    /// Γ⁺ₙ including any anomalous heating (rad/s).
    pub gamma_plus: C64,
    /// Γ⁻ₙ (rad/s).
    pub gamma_minus: C64,
    /// Anomalous heating already folded into `gamma_plus`.
    pub anomalous_heating: f64,
}

impl ModeRates {
    /// `Re(Γ⁻ − Γ⁺)`.
    pub fn w(&self) -> f64 {
        self.gamma_minus.re - self.gamma_plus.re
    }

    pub fn is_cooled(&self) -> bool {
        self.w() > 0.0
    }

    /// Steady-state occupation, `None` for a mode that is not net-cooled.
    pub fn nbar(&self) -> Option<f64> {
        let w = self.w();
        (w > 0.0).then(|| self.gamma_plus.re / w)
    }

    /// `Im(Γ⁺ − (Γ⁻)*)`.
    pub fn lamb_shift(&self) -> f64 {
        self.gamma_plus.im + self.gamma_minus.im
    }

    pub fn shifted_detuning(&self, delta: f64) -> f64 {
        delta + self.lamb_shift()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RatioVariant {
    /// `W(n̄ + 1)/|δ̃|`, for the flip-flop Liouvillian.
    FlipFlop,
    /// `W(n̄ + ½)/|δ̃|`, for the driven Ising Liouvillian.
    Ising,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingRates {
    pub modes: Vec<ModeRates>,
}

impl CoolingRates {
    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn w(&self, mode: usize) -> f64 {
        self.modes[mode].w()
    }

    pub fn nbar(&self, mode: usize) -> Option<f64> {
        self.modes[mode].nbar()
    }

    pub fn lamb_shift(&self, mode: usize) -> f64 {
        self.modes[mode].lamb_shift()
    }

    /// Indices of modes whose net rate is not positive.
    pub fn net_heating_modes(&self) -> Vec<usize> {
        (0..self.len()).filter(|&n| !self.modes[n].is_cooled()).collect()
    }
}

pub fn mode_cooling_rates(laser: &CoolingLaser, modes: &NormalModes) -> Result<CoolingRates> {
    laser.validate(modes)?;
    let half_gamma = 0.5 * laser.gamma_tau;
    let rates = (0..modes.len())
        .map(|n| {
            let w_n = modes.frequencies[n];
            let strength: f64 = laser
                .coolant_indices
                .iter()
                .map(|&l| {
                    let c = 0.5 * laser.omega_tau * laser.eta_tau[n] * modes.amplitude(l, n);
                    c * c
                })
                .sum();
            let gamma_minus = strength / C64::new(half_gamma, -laser.delta_tau - w_n);
            let gamma_plus = strength / C64::new(half_gamma, -laser.delta_tau + w_n);
            ModeRates { gamma_plus, gamma_minus, anomalous_heating: 0.0 }
        })
        .collect();
    Ok(CoolingRates { modes: rates })
}

/// `δ̃ₙ = δₙ + Im(Γ⁺ₙ − (Γ⁻ₙ)*)`.
pub fn shifted_detuning(rates: &CoolingRates, mode: usize, delta: f64) -> f64 {
    rates.modes[mode].shifted_detuning(delta)
}

pub fn coherence_ratio(rates: &CoolingRates, mode: usize, delta_tilde: f64, variant: RatioVariant) -> Result<f64> {
    let m = &rates.modes[mode];
    let nbar = m.nbar().ok_or(Error::NetHeating { mode, w: m.w() })?;
    if delta_tilde == 0.0 {
        return Err(Error::Resonant { mode });
    }
    let offset = match variant {
        RatioVariant::FlipFlop => 1.0,
        RatioVariant::Ising => 0.5,
    };
    Ok(m.w() * (nbar + offset) / delta_tilde.abs())
}

/// Adds the anomalous heating to Re Γ⁺ on each mode.
pub fn apply_anomalous_heating(rates: &CoolingRates, heating: &HeatingSpec) -> Result<CoolingRates> {
    if heating.per_mode.len() != rates.len() {
        return Err(Error::DimensionMismatch { expected: rates.len(), got: heating.per_mode.len() });
    }
    if let Some(bad) = heating.per_mode.iter().find(|r| !(**r >= 0.0)) {
        return Err(Error::InvalidInput(format!("anomalous heating must be non-negative, got {bad}")));
    }
    let modes = rates
        .modes
        .iter()
        .zip(&heating.per_mode)
        .map(|(m, &h)| ModeRates { gamma_plus: m.gamma_plus + h, gamma_minus: m.gamma_minus, anomalous_heating: m.anomalous_heating + h })
        .collect();
    Ok(CoolingRates { modes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{compute_modes, solve_equilibrium};
    use crate::units::mhz;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    /// Single coolant with unit amplitude on a single mode at ω.
    fn single_mode(omega: f64) -> NormalModes {
        NormalModes { frequencies: vec![omega], mode_matrix: nalgebra::DMatrix::from_element(1, 1, 1.0) }
    }

    fn laser(omega_tau: f64, delta_tau: f64, gamma_tau: f64) -> CoolingLaser {
        CoolingLaser { omega_tau, delta_tau, gamma_tau, eta_tau: vec![0.1], coolant_indices: vec![0] }
    }

    #[test]
    fn zero_rabi_frequency_gives_zero_rates() {
        let r = mode_cooling_rates(&laser(0.0, -mhz(20.7), mhz(41.4)), &single_mode(mhz(10.1))).unwrap();
        assert_eq!(r.modes[0].gamma_plus, C64::new(0.0, 0.0));
        assert_eq!(r.w(0), 0.0);
        assert_eq!(r.nbar(0), None);
        assert_eq!(shifted_detuning(&r, 0, mhz(0.3)), mhz(0.3));
    }

    #[test]
    fn doppler_occupation_at_half_linewidth_detuning() {
        // Closed form with a = Γ/2 and |Δ| = a.
        let (a, w) = (20.7, 10.1);
        let lor = |x: f64| a / (a * a + x * x);
        let expected = lor(a + w) / (lor(a - w) - lor(a + w));
        assert_relative_eq!(expected, 0.6470, epsilon = 5e-4);

        let gamma = mhz(41.4);
        let r = mode_cooling_rates(&laser(0.3 * gamma, -0.5 * gamma, gamma), &single_mode(mhz(10.1))).unwrap();
        assert_relative_eq!(r.nbar(0).unwrap(), expected, max_relative = 1e-12);
        assert!(r.w(0) > 0.0);
    }

    #[test]
    fn blue_detuning_heats() {
        let gamma = mhz(41.4);
        let r = mode_cooling_rates(&laser(0.3 * gamma, 0.5 * gamma, gamma), &single_mode(mhz(10.1))).unwrap();
        assert!(r.w(0) < 0.0);
        assert_eq!(r.net_heating_modes(), vec![0]);
        assert!(coherence_ratio(&r, 0, mhz(0.3), RatioVariant::FlipFlop).is_err());
    }

    #[test]
    fn lamb_shift_is_negative_for_red_detuning() {
        let gamma = mhz(41.4);
        let r = mode_cooling_rates(&laser(gamma, -0.5 * gamma, gamma), &single_mode(mhz(10.1))).unwrap();
        assert!(r.lamb_shift(0) < 0.0);
    }

    #[test]
    fn ratio_variants_and_resonance() {
        let gamma = mhz(41.4);
        let r = mode_cooling_rates(&laser(0.3 * gamma, -0.5 * gamma, gamma), &single_mode(mhz(10.1))).unwrap();
        let ff = coherence_ratio(&r, 0, mhz(0.3), RatioVariant::FlipFlop).unwrap();
        let is = coherence_ratio(&r, 0, mhz(0.3), RatioVariant::Ising).unwrap();
        let nbar = r.nbar(0).unwrap();
        assert_relative_eq!(is / ff, (nbar + 0.5) / (nbar + 1.0), max_relative = 1e-14);
        assert!(matches!(coherence_ratio(&r, 0, 0.0, RatioVariant::FlipFlop), Err(Error::Resonant { .. })));
    }

    #[test]
    fn central_coolant_does_not_touch_the_stretch_mode() {
        let chain = IonChain::mg_25_24_25(mhz(4.1));
        let modes = compute_modes(&chain, &solve_equilibrium(&chain).unwrap()).unwrap();
        let gamma = mhz(41.4);
        let laser = CoolingLaser::from_wavelength(&chain, &modes, MG24_COOLING_WAVELENGTH, 1.0, gamma, -0.5 * gamma, gamma).unwrap();
        let r = mode_cooling_rates(&laser, &modes).unwrap();
        assert!(r.modes[1].gamma_plus.norm() < 1e-12 * r.modes[2].gamma_plus.norm());
        assert!(r.modes[1].gamma_minus.norm() < 1e-12 * r.modes[2].gamma_minus.norm());
        assert!(r.w(0) > 0.0 && r.w(2) > 0.0);
    }

    #[test]
    fn zero_heating_is_identity() {
        let gamma = mhz(41.4);
        let r = mode_cooling_rates(&laser(0.3 * gamma, -0.5 * gamma, gamma), &single_mode(mhz(10.1))).unwrap();
        assert_eq!(apply_anomalous_heating(&r, &HeatingSpec::none(1)).unwrap(), r);
        assert!(apply_anomalous_heating(&r, &HeatingSpec::uniform(-1.0, 1)).is_err());
    }

    proptest! {
        #[test]
        fn occupation_is_independent_of_rabi_frequency(scale in 0.01f64..100.0) {
            let gamma = mhz(41.4);
            let modes = single_mode(mhz(10.1));
            let a = mode_cooling_rates(&laser(0.2 * gamma, -0.5 * gamma, gamma), &modes).unwrap();
            let b = mode_cooling_rates(&laser(0.2 * gamma * scale, -0.5 * gamma, gamma), &modes).unwrap();
            let (na, nb) = (a.nbar(0).unwrap(), b.nbar(0).unwrap());
            prop_assert!((na - nb).abs() <= 1e-12 * na);
            prop_assert!((b.w(0) / a.w(0) - scale * scale).abs() <= 1e-10 * scale * scale);
        }

        #[test]
        fn occupation_grows_with_heating(h1 in 0.0f64..500.0, dh in 1e-3f64..500.0) {
            let gamma = mhz(41.4);
            let r = mode_cooling_rates(&laser(0.15 * gamma, -0.5 * gamma, gamma), &single_mode(mhz(10.1))).unwrap();
            let lo = apply_anomalous_heating(&r, &HeatingSpec::uniform(h1, 1)).unwrap();
            let hi = apply_anomalous_heating(&r, &HeatingSpec::uniform(h1 + dh, 1)).unwrap();
            prop_assert!(hi.nbar(0).unwrap() > lo.nbar(0).unwrap());
            prop_assert!((lo.nbar(0).unwrap() - lo.modes[0].gamma_plus.re / lo.w(0)).abs() < 1e-15);
        }
    }
}
