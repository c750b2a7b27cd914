// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

use ionsim_core::cooling::{mode_cooling_rates, CoolingLaser, CoolingRates, HeatingSpec, ModeRates, MG24_COOLING_WAVELENGTH};
use ionsim_core::crystal::{compute_modes, solve_equilibrium, IonChain, NormalModes};
use ionsim_core::dynamics::{evolve, integrate, linear_grid, ObservableSet, SolverConfig};
use ionsim_core::fullmodel::{FockCutoff, RamanDrive, SpinPhononLiouvillian};
use ionsim_core::lindblad::{Channel, Lindbladian};
use ionsim_core::ops::{annihilation, sigma_minus, sigma_plus, Space, SparseMat};
use ionsim_core::state::{spin_ket, thermal_populations, Basis, DensityMatrix};
use ionsim_core::units::{mhz, per_ms};
use ionsim_core::C64;
use nalgebra::{DMatrix, DVector};

fn one_mode(freq: f64) -> NormalModes {
    NormalModes { frequencies: vec![freq], mode_matrix: DMatrix::from_element(1, 1, 1.0) }
}

fn sideband_drive(f: f64, delta: f64) -> RamanDrive {
    RamanDrive { omega_sigma: 2.0 * f, sigma_indices: vec![0], phases: vec![-std::f64::consts::FRAC_PI_2], eta_sigma: vec![1.0], detunings: vec![delta] }
}

fn rates(gm: f64, gp: f64, lamb: f64) -> CoolingRates {
    // Im(Γ⁺ + Γ⁻) = lamb
    CoolingRates { modes: vec![ModeRates { gamma_plus: C64::new(gp, 0.5 * lamb), gamma_minus: C64::new(gm, 0.5 * lamb), anomalous_heating: 0.0 }] }
}

#[test]
fn adaptive_integration_matches_superoperator_exponential() {
    // One spin, one mode, n_max = 3: dim 8, superoperator 64 × 64.
    let modes = one_mode(mhz(1.0));
    let drive = sideband_drive(2.1e3, -9.0e3);
    let cutoff = FockCutoff::new(vec![0], vec![3], 1e-6).unwrap();
    let model = SpinPhononLiouvillian::build(&drive, &modes, &rates(4.0e3, 1.5e3, -600.0), &HeatingSpec::uniform(200.0, 1), &cutoff, None).unwrap();
    assert_eq!(model.generator.dim(), 8);
    let spins = DensityMatrix::from_pure(&spin_ket("u").unwrap(), Basis::spins_only(vec![0])).unwrap();
    let rho0 = DensityMatrix::product(&spins.matrix, &[thermal_populations(0.4, 3)], model.basis.clone()).unwrap();
    let s = model.generator.superoperator();
    let times = linear_grid(1.2e-3, 7);
    let cfg = SolverConfig { rel_tol: 1e-11, abs_tol: 1e-13, ..Default::default() }.with_grid(times.clone());
    let v0 = DVector::from_column_slice(rho0.matrix.as_slice());
    let mut worst: f64 = 0.0;
    integrate(&model.generator, &rho0.matrix, 0.0, &cfg, |i, t, rho| {
        let exact = (&s * C64::new(t, 0.0)).exp() * &v0;
        let exact = DMatrix::from_column_slice(8, 8, exact.as_slice());
        worst = worst.max((rho - exact).iter().map(|z| z.norm()).fold(0.0, f64::max));
        assert_eq!(t, times[i]);
        Ok(())
    })
    .unwrap();
    assert!(worst < 1e-8, "max entry deviation {worst:.3e}");
}

#[test]
fn exchange_oscillation_is_cosine_squared() {
    let j = 1.7e3;
    let space = Space { dims: vec![2, 2] };
    let hop = space.embed_pair(&sigma_plus(), 0, &sigma_minus(), 1).unwrap();
    let h = hop.add(&hop.adjoint()).scale(C64::new(j, 0.0));
    let gen = Lindbladian::new(h, vec![]).unwrap();
    let rho0 = DensityMatrix::from_pure(&spin_ket("ud").unwrap(), Basis::spins_only(vec![0, 2])).unwrap();
    let cfg = SolverConfig::default().with_grid(linear_grid(2e-3, 41));
    let ev = evolve(&gen, &rho0, &cfg, &ObservableSet::default(), false).unwrap();
    let p1 = ev.series.column("P_up_1").unwrap();
    let p3 = ev.series.column("P_up_3").unwrap();
    for (k, &t) in ev.series.times.iter().enumerate() {
        let c = (j * t).cos();
        assert!((p1[k] - c * c).abs() < 1e-7, "t = {t}: {} vs {}", p1[k], c * c);
        assert!((p1[k] + p3[k] - 1.0).abs() < 1e-10);
    }
}

/// `d⟨n⟩/dt = −γ₋⟨n⟩ + γ₊(⟨n⟩ + 1)` for channels `(b, γ₋)`, `(b†, γ₊)`.
fn moment_solution(gm: f64, gp: f64, n0: f64, t: f64) -> f64 {
    let n_ss = gp / (gm - gp);
    n_ss + (n0 - n_ss) * (-(gm - gp) * t).exp()
}

#[test]
fn damped_oscillator_follows_moment_equation() {
    let (gm, gp, n_max) = (5.0e3, 1.2e3, 40);
    let a = annihilation(n_max);
    let gen = Lindbladian::new(SparseMat::zeros(n_max + 1), vec![Channel::new(a.clone(), gm, "c"), Channel::new(a.adjoint(), gp, "h")]).unwrap();
    let basis = Basis { spin_ions: vec![], modes: vec![0], fock_dims: vec![n_max + 1] };
    let mut pops = vec![0.0; n_max + 1];
    pops[2] = 1.0;
    let rho0 = DensityMatrix::new(DMatrix::from_diagonal(&DVector::from_iterator(n_max + 1, pops.iter().map(|&p| C64::new(p, 0.0)))), basis).unwrap();
    let cfg = SolverConfig::default().with_grid(linear_grid(2e-3, 21));
    let ev = evolve(&gen, &rho0, &cfg, &ObservableSet::default(), false).unwrap();
    let n = ev.series.column("n_mode_1").unwrap();
    for (k, &t) in ev.series.times.iter().enumerate() {
        let exact = moment_solution(gm, gp, 2.0, t);
        assert!(((n[k] - exact) / exact).abs() < 1e-7, "t = {t}: {} vs {exact}", n[k]);
    }
}

#[test]
fn sympathetic_cooling_relaxes_to_closed_form() {
    let chain = IonChain::mg_25_24_25(mhz(4.1));
    let modes = compute_modes(&chain, &solve_equilibrium(&chain).unwrap()).unwrap();
    let g = mhz(41.4);
    let laser = CoolingLaser::from_wavelength(&chain, &modes, MG24_COOLING_WAVELENGTH, 1.0, 0.15 * g, -0.5 * g, g).unwrap();
    let bare = mode_cooling_rates(&laser, &modes).unwrap();
    let heat = per_ms(0.1);
    let m = &bare.modes[2];
    let (gm, gp) = (2.0 * m.gamma_minus.re, 2.0 * (m.gamma_plus.re + heat));
    // Drive off: only cooling and heating act on the Egyptian mode.
    let drive = RamanDrive { omega_sigma: 0.0, sigma_indices: vec![0, 2], phases: vec![0.0, 0.0], eta_sigma: vec![0.1; 3], detunings: vec![-mhz(0.3); 3] };
    let cutoff = FockCutoff::new(vec![2], vec![22], 1e-6).unwrap();
    let model = SpinPhononLiouvillian::build(&drive, &modes, &bare, &HeatingSpec::uniform(heat, 3), &cutoff, None).unwrap();
    let spins = DensityMatrix::from_pure(&spin_ket("ud").unwrap(), Basis::spins_only(vec![0, 2])).unwrap();
    let rho0 = DensityMatrix::product(&spins.matrix, &[thermal_populations(0.0, 22)], model.basis.clone()).unwrap();
    let t_relax = 1.0 / (gm - gp);
    let cfg = SolverConfig::default().with_grid(linear_grid(5.0 * t_relax, 11));
    let ev = evolve(&model.generator, &rho0, &cfg, &ObservableSet::default(), false).unwrap();
    let n = ev.series.column("n_mode_3").unwrap();
    for (k, &t) in ev.series.times.iter().enumerate().skip(1) {
        let exact = moment_solution(gm, gp, 0.0, t);
        assert!(((n[k] - exact) / exact).abs() < 1e-6, "t = {t}: {} vs {exact}", n[k]);
    }
    // Spins are untouched.
    assert!(ev.series.column("P_up_1").unwrap().iter().all(|p| (p - 1.0).abs() < 1e-12));
}
