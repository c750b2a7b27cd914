// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Dormand–Prince 5(4) with PI step control for `dρ/dt = L(ρ)`.
//!
//! Steps are shortened to land on every output time, so no interpolation is needed.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::lindblad::Lindbladian;
use crate::{Error, Result};

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b − b̂
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper bound on a single step (s).
    pub max_step: f64,
    pub output_grid: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { rel_tol: 1e-8, abs_tol: 1e-10, max_step: f64::INFINITY, output_grid: Vec::new() }
    }
}

impl SolverConfig {
    pub fn with_grid(mut self, grid: Vec<f64>) -> Self {
        self.output_grid = grid;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidInput("tolerances must be positive".into()));
        }
        if !(self.max_step > 0.0) {
            return Err(Error::InvalidInput("max_step must be positive".into()));
        }
        if self.output_grid.is_empty() {
            return Err(Error::InvalidInput("empty output grid".into()));
        }
        if self.output_grid.iter().any(|t| !t.is_finite() || *t < 0.0) || self.output_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("output grid must be non-negative and strictly ascending".into()));
        }
        Ok(())
    }
}

/// `n` evenly spaced points on `[0, t_end]`.
pub fn linear_grid(t_end: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![t_end];
    }
    (0..n).map(|k| t_end * k as f64 / (n - 1) as f64).collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolverStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

struct Work {
    hermitian: bool,
    k: [Vec<C64>; 7],
    y_stage: Vec<C64>,
    y_new: Vec<C64>,
    err: Vec<C64>,
    scratch: Vec<C64>,
}

fn combo(y: &[C64], h: f64, terms: &[(f64, &[C64])], out: &mut [C64]) {
    out.copy_from_slice(y);
    for &(a, k) in terms {
        if a == 0.0 {
            continue;
        }
        let ah = a * h;
        for (o, &kv) in out.iter_mut().zip(k) {
            *o += kv * ah;
        }
    }
}

fn error_norm(y: &[C64], y_new: &[C64], err: &[C64], rtol: f64, atol: f64) -> f64 {
    let sum: f64 = y
        .iter()
        .zip(y_new)
        .zip(err)
        .map(|((a, b), e)| {
            // |z| via sqrt(norm_sqr): hypot's overflow guard is not needed here.
            let sc = atol + rtol * a.norm_sqr().max(b.norm_sqr()).sqrt();
            e.norm_sqr() / (sc * sc)
        })
        .sum();
    (sum / y.len() as f64).sqrt()
}

/// Integrates from `t0` through every grid point, calling `observe(index, t, ρ)` there.
/// Grid points equal to `t0` are reported without stepping.
pub fn integrate<F>(gen: &Lindbladian, rho0: &DMatrix<C64>, t0: f64, cfg: &SolverConfig, mut observe: F) -> Result<(DMatrix<C64>, SolverStats)>
where
    F: FnMut(usize, f64, &DMatrix<C64>) -> Result<()>,
{
    cfg.validate()?;
    let n = gen.dim();
    if rho0.nrows() != n || rho0.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: rho0.nrows() });
    }
    if cfg.output_grid[0] < t0 {
        return Err(Error::InvalidInput("output grid starts before the initial time".into()));
    }
    let len = n * n;
    let mut y = rho0.clone();
    let scale = rho0.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let hermitian = (0..n).all(|j| (0..n).all(|i| (rho0[(i, j)] - rho0[(j, i)].conj()).norm() <= 1e-14 * scale));
    if hermitian {
        y = (&y + y.adjoint()) * C64::new(0.5, 0.0);
    }
    let mut w = Work {
        hermitian,
        k: std::array::from_fn(|_| vec![C64::new(0.0, 0.0); len]),
        y_stage: vec![C64::new(0.0, 0.0); len],
        y_new: vec![C64::new(0.0, 0.0); len],
        err: vec![C64::new(0.0, 0.0); len],
        scratch: Vec::new(),
    };
    let mut stats = SolverStats::default();
    let mut t = t0;
    rhs(gen, hermitian, y.as_slice(), &mut w.k[0], &mut w.scratch);
    stats.rhs_evals += 1;

    let t_end = *cfg.output_grid.last().unwrap();
    let mut h = initial_step(y.as_slice(), &w.k[0], cfg, (t_end - t0).max(f64::MIN_POSITIVE));
    let mut err_prev: f64 = 1e-4;
    let mut out_buf = DMatrix::<C64>::zeros(n, n);

    for (idx, &t_out) in cfg.output_grid.iter().enumerate() {
        while t < t_out {
            let remaining = t_out - t;
            let landing = h >= remaining * (1.0 - 1e-12);
            let step = if landing { remaining } else { h.min(cfg.max_step) };
            if step <= 1e-14 * t.abs().max(f64::MIN_POSITIVE) && !landing {
                return Err(Error::StepUnderflow { t, h: step });
            }
            dp_step(gen, y.as_slice(), step, &mut w);
            stats.rhs_evals += 6;
            let err = error_norm(y.as_slice(), &w.y_new, &w.err, cfg.rel_tol, cfg.abs_tol);
            if !err.is_finite() {
                return Err(Error::InvariantViolation { t, what: "non-finite state during integration".into() });
            }
            if err <= 1.0 {
                stats.accepted += 1;
                t = if landing { t_out } else { t + step };
                y.as_mut_slice().copy_from_slice(&w.y_new);
                w.k.swap(0, 6);
                let fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
                let grown = step * fac.clamp(0.2, 10.0);
                // Keep the controller's proposal when the step was only shortened to land.
                h = if landing { h.max(grown) } else { grown };
                err_prev = err.max(1e-4);
            } else {
                stats.rejected += 1;
                h = step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
            h = h.min(cfg.max_step);
            if h < 1e-14 * t.abs().max(1e-300) {
                return Err(Error::StepUnderflow { t, h });
            }
        }
        out_buf.copy_from(&y);
        observe(idx, t_out, &out_buf)?;
    }
    Ok((y, stats))
}

fn rhs(gen: &Lindbladian, hermitian: bool, y: &[C64], out: &mut [C64], scratch: &mut Vec<C64>) {
    if hermitian {
        gen.apply_hermitian_into(y, out, scratch);
    } else {
        gen.apply_into(y, out, scratch);
    }
}

/// One trial step: solution in `y_new`, f(y_new) in `k[6]`, error estimate in `err`.
fn dp_step(gen: &Lindbladian, y: &[C64], h: f64, w: &mut Work) {
    let Work { hermitian, k, y_stage, y_new, err, scratch } = w;
    let herm = *hermitian;
    let [k1, k2, k3, k4, k5, k6, k7] = k;
    combo(y, h, &[(A21, k1)], y_stage);
    rhs(gen, herm, y_stage, k2, scratch);
    combo(y, h, &[(A31, k1), (A32, k2)], y_stage);
    rhs(gen, herm, y_stage, k3, scratch);
    combo(y, h, &[(A41, k1), (A42, k2), (A43, k3)], y_stage);
    rhs(gen, herm, y_stage, k4, scratch);
    combo(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)], y_stage);
    rhs(gen, herm, y_stage, k5, scratch);
    combo(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)], y_stage);
    rhs(gen, herm, y_stage, k6, scratch);
    combo(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)], y_new);
    rhs(gen, herm, y_new, k7, scratch);
    for i in 0..y.len() {
        err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
    }
}

fn initial_step(y: &[C64], f0: &[C64], cfg: &SolverConfig, span: f64) -> f64 {
    let sc: Vec<f64> = y.iter().map(|v| cfg.abs_tol + cfg.rel_tol * v.norm()).collect();
    let d0 = (y.iter().zip(&sc).map(|(v, s)| (v.norm() / s).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
    let d1 = (f0.iter().zip(&sc).map(|(v, s)| (v.norm() / s).powi(2)).sum::<f64>() / y.len() as f64).sqrt();
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 * span } else { 0.01 * d0 / d1 };
    h.min(span).min(cfg.max_step)
}
