// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Stationary states of a Lindbladian.
//!
//! Small generators: null space of the assembled superoperator by SVD. When the null
//! space is degenerate, the stationary state reached from a given initial state is the
//! projection through the conserved quantities (left null vectors). Large generators:
//! evolve until the derivative is negligible.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use super::integrator::{integrate, SolverConfig};
use crate::lindblad::Lindbladian;
use crate::state::{Basis, DensityMatrix};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyMethod {
    NullSpace,
    Evolution,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyOptions {
    /// Largest Hilbert dimension handled by the dense null-space route.
    pub max_dense_dim: usize,
    /// Singular values below `null_tol · σ_max` count as zero.
    pub null_tol: f64,
    /// Convergence of the evolution route: `‖L(ρ)‖₁ < residual_tol · ‖L‖`.
    pub residual_tol: f64,
    /// Give up after this much evolved time (s).
    pub max_time: f64,
}

impl Default for SteadyOptions {
    fn default() -> Self {
        Self { max_dense_dim: 16, null_tol: 1e-10, residual_tol: 1e-10, max_time: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct SteadyState {
    pub state: DensityMatrix,
    pub method: SteadyMethod,
    /// Dimension of the stationary manifold (null-space route only, else 1).
    pub null_dim: usize,
    /// Unit-trace Hermitian basis of the stationary manifold when it is degenerate.
    pub manifold: Vec<DMatrix<C64>>,
    /// `‖L(ρ_ss)‖₁` in the generator's units.
    pub residual: f64,
    /// Evolved time for the evolution route.
    pub time: f64,
}

impl SteadyState {
    pub fn is_degenerate(&self) -> bool {
        self.null_dim > 1
    }
}

fn trace_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().iter().sum()
}

/// Rough operator scale of the generator, used to make the residual dimensionless.
fn generator_scale(gen: &Lindbladian) -> f64 {
    let h = gen.hamiltonian().max_abs();
    let d: f64 = gen.channels().iter().map(|c| c.rate * c.op.max_abs().powi(2)).sum();
    (h + d).max(f64::MIN_POSITIVE)
}

fn unvec(v: &DVector<C64>, n: usize) -> DMatrix<C64> {
    DMatrix::from_column_slice(n, n, v.as_slice())
}

/// `rho0` selects the point on a degenerate stationary manifold; without it the
/// returned state is the normalised first basis element.
pub fn steady_state(gen: &Lindbladian, basis: &Basis, rho0: Option<&DensityMatrix>, opts: &SteadyOptions) -> Result<SteadyState> {
    let n = gen.dim();
    if basis.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: basis.dim() });
    }
    if n <= opts.max_dense_dim {
        null_space_route(gen, basis, rho0, opts)
    } else {
        let start = match rho0 {
            Some(r) => r.matrix.clone(),
            None => DMatrix::identity(n, n) / C64::new(n as f64, 0.0),
        };
        evolution_route(gen, basis, start, opts)
    }
}

fn null_space_route(gen: &Lindbladian, basis: &Basis, rho0: Option<&DensityMatrix>, opts: &SteadyOptions) -> Result<SteadyState> {
    let n = gen.dim();
    let s = gen.superoperator();
    let right = null_vectors(&s, opts.null_tol);
    let left = null_vectors(&s.adjoint(), opts.null_tol);
    if right.is_empty() {
        return Err(Error::Unphysical("generator has no stationary state".into()));
    }
    // Hermitian, unit-trace basis of the stationary manifold.
    let mut manifold: Vec<DMatrix<C64>> = Vec::new();
    for v in &right {
        let m = unvec(v, n);
        for cand in [&m + m.adjoint(), (&m - m.adjoint()) * C64::new(0.0, 1.0)] {
            let tr = cand.trace();
            if tr.norm() > 1e-8 * cand.norm() {
                manifold.push(cand / tr);
            }
        }
    }
    manifold = independent_subset(manifold, right.len());
    let state = if right.len() == 1 {
        let m = unvec(&right[0], n);
        m.clone() / m.trace()
    } else if let Some(r0) = rho0 {
        project(&right, &left, &r0.matrix, n)?
    } else {
        manifold.first().cloned().ok_or_else(|| Error::Unphysical("stationary manifold has no trace-one element".into()))?
    };
    let state = (&state + state.adjoint()) * C64::new(0.5, 0.0);
    let residual = trace_norm(&gen.apply(&state)?);
    Ok(SteadyState {
        state: DensityMatrix::new(state, basis.clone())?,
        method: SteadyMethod::NullSpace,
        null_dim: right.len(),
        manifold: if right.len() > 1 { manifold } else { Vec::new() },
        residual,
        time: 0.0,
    })
}

fn null_vectors(s: &DMatrix<C64>, tol: f64) -> Vec<DVector<C64>> {
    let svd = s.clone().svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.singular_values.iter().enumerate().filter(|(_, &sv)| sv <= tol * smax.max(f64::MIN_POSITIVE)).map(|(k, _)| v_t.row(k).adjoint()).collect()
}

fn independent_subset(cands: Vec<DMatrix<C64>>, want: usize) -> Vec<DMatrix<C64>> {
    let mut kept: Vec<DMatrix<C64>> = Vec::new();
    let mut ortho: Vec<DVector<C64>> = Vec::new();
    for c in cands {
        let mut v = DVector::from_column_slice(c.as_slice());
        for o in &ortho {
            let p = o.dotc(&v);
            v -= o * p;
        }
        let norm = v.norm();
        if norm > 1e-8 * c.norm() {
            ortho.push(v / C64::new(norm, 0.0));
            kept.push(c);
        }
        if kept.len() == want {
            break;
        }
    }
    kept
}

/// `ρ∞ = Σ_l M_l (G⁻¹ c)_l`, `G_kl = ⟨J_k, M_l⟩`, `c_k = ⟨J_k, ρ0⟩`.
fn project(right: &[DVector<C64>], left: &[DVector<C64>], rho0: &DMatrix<C64>, n: usize) -> Result<DMatrix<C64>> {
    if left.len() != right.len() {
        return Err(Error::Unphysical(format!("left and right null spaces differ ({} vs {})", left.len(), right.len())));
    }
    let k = right.len();
    let g = DMatrix::from_fn(k, k, |a, b| left[a].dotc(&right[b]));
    let r0 = DVector::from_column_slice(rho0.as_slice());
    let c = DVector::from_fn(k, |a, _| left[a].dotc(&r0));
    let coeff = g.lu().solve(&c).ok_or_else(|| Error::Unphysical("singular overlap of stationary modes".into()))?;
    let mut out = DVector::zeros(n * n);
    for (l, v) in right.iter().enumerate() {
        out += v * coeff[l];
    }
    Ok(unvec(&out, n))
}

fn evolution_route(gen: &Lindbladian, basis: &Basis, mut rho: DMatrix<C64>, opts: &SteadyOptions) -> Result<SteadyState> {
    let scale = generator_scale(gen);
    // Chunks grow geometrically from the fastest time scale.
    let mut chunk = 10.0 / scale;
    let mut t = 0.0;
    let cfg = SolverConfig { rel_tol: 1e-10, abs_tol: 1e-13, ..Default::default() };
    loop {
        let residual = trace_norm(&gen.apply(&rho)?);
        if residual < opts.residual_tol * scale {
            return Ok(SteadyState {
                state: DensityMatrix::new(rho, basis.clone())?,
                method: SteadyMethod::Evolution,
                null_dim: 1,
                manifold: Vec::new(),
                residual,
                time: t,
            });
        }
        if t >= opts.max_time {
            return Err(Error::InvariantViolation { t, what: format!("no stationary state reached (residual {residual:.3e})") });
        }
        let step = chunk.min(opts.max_time - t);
        let c = SolverConfig { output_grid: vec![t + step], ..cfg.clone() };
        rho = integrate(gen, &rho, t, &c, |_, _, _| Ok(()))?.0;
        t += step;
        chunk *= 2.0;
    }
}
