// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Ornstein–Uhlenbeck dephasing and trajectory averaging.
//!
//! `⟨F(s)F(0)⟩ = (2Γ_d/τ_c) e^{−s/τ_c}`, sampled with the exact one-step update. Each
//! trajectory holds `Fᵢ(t)` constant over segments no longer than `τ_c/10` and adds
//! `Σᵢ Fᵢ Oᵢ` to the Hamiltonian there. Trajectory `k` draws from ChaCha8 stream `k` of
//! the master seed, so ensembles are reproducible under any thread count.

use log::warn;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::integrator::{integrate, SolverConfig};
use super::{Column, TimeSeries};
use crate::lindblad::Lindbladian;
use crate::ops::SparseMat;
use crate::state::DensityMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OUNoise {
    /// Γ_d (rad/s).
    pub gamma_d: f64,
    /// τ_c (s).
    pub tau_c: f64,
    pub seed: u64,
    /// Independent paths per ion; otherwise one shared path.
    pub independent: bool,
}

impl OUNoise {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_d >= 0.0) || !(self.tau_c > 0.0) {
            return Err(Error::InvalidInput("noise needs Gamma_d >= 0 and tau_c > 0".into()));
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        2.0 * self.gamma_d / self.tau_c
    }
}

/// Generator of one stationary path.
#[derive(Debug, Clone, Copy)]
pub struct OuProcess {
    pub value: f64,
    sigma: f64,
    tau: f64,
}

impl OuProcess {
    pub fn stationary<R: Rng>(noise: &OUNoise, rng: &mut R) -> Self {
        let sigma = noise.variance().sqrt();
        let z: f64 = rng.sample(StandardNormal);
        Self { value: sigma * z, sigma, tau: noise.tau_c }
    }

    pub fn step<R: Rng>(&mut self, dt: f64, rng: &mut R) -> f64 {
        let decay = (-dt / self.tau).exp();
        let z: f64 = rng.sample(StandardNormal);
        self.value = self.value * decay + self.sigma * (1.0 - decay * decay).sqrt() * z;
        self.value
    }
}

pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// `n_paths` stationary paths of `n_steps + 1` samples spaced by `dt`.
pub fn ou_sample(noise: &OUNoise, dt: f64, n_steps: usize, n_paths: usize) -> Result<Vec<Vec<f64>>> {
    noise.validate()?;
    if dt > noise.tau_c / 10.0 {
        warn!("OU step {dt:.3e} s exceeds tau_c/10");
    }
    let mut rng = trajectory_rng(noise.seed, 0);
    let n_indep = if noise.independent { n_paths } else { 1 };
    let mut procs: Vec<OuProcess> = (0..n_indep).map(|_| OuProcess::stationary(noise, &mut rng)).collect();
    let mut paths = vec![Vec::with_capacity(n_steps + 1); n_paths];
    for step in 0..=n_steps {
        if step > 0 {
            for p in procs.iter_mut() {
                p.step(dt, &mut rng);
            }
        }
        for (i, path) in paths.iter_mut().enumerate() {
            path.push(procs[if noise.independent { i } else { 0 }].value);
        }
    }
    Ok(paths)
}

/// One stochastic Hamiltonian term `F_k(t) · op_k`.
#[derive(Debug, Clone)]
pub struct NoiseTerm {
    pub op: SparseMat,
}

#[derive(Debug, Clone)]
pub struct TrajectoryConfig {
    pub solver: SolverConfig,
    pub n_traj: usize,
    /// Longest piecewise-constant segment; defaults to `τ_c/10`.
    pub max_segment: Option<f64>,
}

/// Unitary propagator `exp(−iH dt)` of a dense Hermitian `H`.
fn unitary(h: &DMatrix<C64>, dt: f64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * dt)));
    v * phases * v.adjoint()
}

/// Mean and standard error of `observe(ρ)` over `cfg.n_traj` noise realisations.
pub fn trajectory_average<O>(
    gen: &Lindbladian,
    terms: &[NoiseTerm],
    noise: &OUNoise,
    rho0: &DensityMatrix,
    cfg: &TrajectoryConfig,
    names: &[String],
    observe: O,
) -> Result<TimeSeries>
where
    O: Fn(&DMatrix<C64>) -> Vec<f64> + Sync,
{
    noise.validate()?;
    cfg.solver.validate()?;
    if cfg.n_traj < 2 {
        return Err(Error::InvalidInput("trajectory averaging needs at least two trajectories".into()));
    }
    if terms.iter().any(|t| t.op.dim() != gen.dim()) || rho0.dim() != gen.dim() {
        return Err(Error::DimensionMismatch { expected: gen.dim(), got: rho0.dim() });
    }
    let max_seg = cfg.max_segment.unwrap_or(noise.tau_c / 10.0);
    if max_seg > noise.tau_c / 10.0 {
        warn!("noise segment {max_seg:.3e} s exceeds tau_c/10");
    }
    let grid = &cfg.solver.output_grid;
    let unitary_only = gen.channels().is_empty();
    let h0 = gen.hamiltonian().to_dense();
    let dense_terms: Vec<DMatrix<C64>> = terms.iter().map(|t| t.op.to_dense()).collect();

    let run = |k: usize| -> Result<Vec<Vec<f64>>> {
        let mut rng = trajectory_rng(noise.seed, k as u64);
        let n_proc = if noise.independent { terms.len() } else { 1 };
        let mut procs: Vec<OuProcess> = (0..n_proc).map(|_| OuProcess::stationary(noise, &mut rng)).collect();
        let mut rho = rho0.matrix.clone();
        let mut t = 0.0;
        let mut rows = Vec::with_capacity(grid.len());
        for &t_out in grid {
            let span = t_out - t;
            let n_seg = if span > 0.0 { (span / max_seg).ceil().max(1.0) as usize } else { 0 };
            for _ in 0..n_seg {
                let dt = span / n_seg as f64;
                let values: Vec<f64> = (0..terms.len()).map(|i| procs[if noise.independent { i } else { 0 }].value).collect();
                if unitary_only {
                    let mut h = h0.clone();
                    for (op, v) in dense_terms.iter().zip(&values) {
                        h += op * C64::new(*v, 0.0);
                    }
                    let u = unitary(&h, dt);
                    rho = &u * rho * u.adjoint();
                } else {
                    let mut extra = SparseMat::zeros(gen.dim());
                    for (term, v) in terms.iter().zip(&values) {
                        extra = extra.add(&term.op.scale(C64::new(*v, 0.0)));
                    }
                    let g = gen.with_extra_hamiltonian(&extra)?;
                    let c = SolverConfig { output_grid: vec![t + dt], ..cfg.solver.clone() };
                    rho = integrate(&g, &rho, t, &c, |_, _, _| Ok(()))?.0;
                }
                t += dt;
                for p in procs.iter_mut() {
                    p.step(dt, &mut rng);
                }
            }
            t = t_out;
            rows.push(observe(&rho));
        }
        Ok(rows)
    };

    let all: Vec<Vec<Vec<f64>>> = (0..cfg.n_traj).into_par_iter().map(run).collect::<Result<_>>()?;
    let n = cfg.n_traj as f64;
    let columns = names
        .iter()
        .enumerate()
        .map(|(c, name)| {
            let mut mean = Vec::with_capacity(grid.len());
            let mut se = Vec::with_capacity(grid.len());
            for ti in 0..grid.len() {
                let xs: Vec<f64> = all.iter().map(|traj| traj[ti][c]).collect();
                let m = xs.iter().sum::<f64>() / n;
                let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
                mean.push(m);
                se.push((var / n).sqrt());
            }
            Column { name: name.clone(), values: mean, stderr: Some(se) }
        })
        .collect();
    Ok(TimeSeries { times: grid.clone(), columns })
}
