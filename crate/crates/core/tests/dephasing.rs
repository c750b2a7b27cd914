// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

use ionsim_core::dynamics::{linear_grid, trajectory_average, NoiseTerm, OUNoise, SolverConfig, TrajectoryConfig};
use ionsim_core::effective::dressed_noise_params;
use ionsim_core::lindblad::Lindbladian;
use ionsim_core::ops::{sigma_x, sigma_z, SparseMat};
use ionsim_core::state::{Basis, DensityMatrix};
use ionsim_core::units::{khz, mhz};
use ionsim_core::C64;
use nalgebra::DMatrix;

fn plus() -> DensityMatrix {
    DensityMatrix::new(DMatrix::from_element(2, 2, C64::new(0.5, 0.0)), Basis::spins_only(vec![0])).unwrap()
}

fn sx(rho: &DMatrix<C64>) -> Vec<f64> {
    vec![(rho * sigma_x().to_dense()).trace().re]
}

fn half_sz() -> Vec<NoiseTerm> {
    vec![NoiseTerm { op: sigma_z().scale(C64::new(0.5, 0.0)) }]
}

/// Coherence of |+⟩ under `½F σᶻ` with OU `F`: `exp(−2Γ_d (t − τ_c(1 − e^{−t/τ_c})))`.
fn ou_coherence(gamma_d: f64, tau_c: f64, t: f64) -> f64 {
    (-2.0 * gamma_d * (t - tau_c * (1.0 - (-t / tau_c).exp()))).exp()
}

fn free_ensemble(n_traj: usize, t: f64) -> (f64, f64) {
    let gamma_d = 1.0e4;
    let noise = OUNoise { gamma_d, tau_c: 1e-2 / gamma_d, seed: 2026, independent: true };
    let gen = Lindbladian::new(SparseMat::zeros(2), vec![]).unwrap();
    let cfg = TrajectoryConfig { solver: SolverConfig::default().with_grid(linear_grid(t, 4)), n_traj, max_segment: None };
    let ts = trajectory_average(&gen, &half_sz(), &noise, &plus(), &cfg, &["sx".into()], sx).unwrap();
    for (k, &tk) in ts.times.iter().enumerate() {
        let (c, se) = (ts.column("sx").unwrap()[k], ts.stderr("sx").unwrap()[k]);
        let exact = ou_coherence(gamma_d, noise.tau_c, tk);
        assert!((c - exact).abs() <= 3.0 * se + 1e-12, "t = {tk}: {c:.4} +- {se:.4} vs {exact:.4}");
    }
    let c = *ts.column("sx").unwrap().last().unwrap();
    (gamma_d, -c.ln() / (2.0 * t))
}

#[test]
fn ensemble_coherence_matches_ou_result() {
    // 200 paths: the rate itself scatters by about 10% (one standard error).
    free_ensemble(200, 30e-6);
}

#[test]
fn free_precession_dephases_at_gamma_d() {
    let (gamma_d, rate) = free_ensemble(2000, 30e-6);
    assert!((rate / gamma_d - 1.0).abs() < 0.10, "rate {rate:.4e} vs Gamma_d {gamma_d:.4e}");
}

#[test]
fn strong_drive_suppresses_dephasing() {
    let gamma_d = khz(1.0);
    let tau_c = 1e-2 / gamma_d;
    let omega_d = mhz(10.0);
    let noise = OUNoise { gamma_d, tau_c, seed: 7, independent: true };
    let (t_free, t) = (20e-6, 200e-6);
    let cfg = TrajectoryConfig { solver: SolverConfig::default().with_grid(vec![0.0, t_free, t]), n_traj: 200, max_segment: None };
    let bare = Lindbladian::new(SparseMat::zeros(2), vec![]).unwrap();
    let driven = Lindbladian::new(sigma_x().scale(C64::new(0.5 * omega_d, 0.0)), vec![]).unwrap();
    let free = trajectory_average(&bare, &half_sz(), &noise, &plus(), &cfg, &["sx".into()], sx).unwrap();
    let locked = trajectory_average(&driven, &half_sz(), &noise, &plus(), &cfg, &["sx".into()], sx).unwrap();
    let r_free = -free.column("sx").unwrap()[1].ln() / (2.0 * t_free);
    let r_locked = -locked.column("sx").unwrap()[2].ln() / (2.0 * t);
    assert!(r_free > 0.5 * gamma_d, "free rate {r_free:.4e}");
    assert!(r_locked <= 1e-2 * gamma_d, "locked rate {r_locked:.4e} vs {:.4e}", 1e-2 * gamma_d);
    // Compatible with the dressed rate, far below the bound.
    let dressed = dressed_noise_params(&DMatrix::zeros(1, 0), &[], tau_c, gamma_d, omega_d).unwrap();
    assert!(r_locked < 1e-3 * gamma_d);
    assert!(dressed.gamma < 1e-3 * gamma_d);
}
