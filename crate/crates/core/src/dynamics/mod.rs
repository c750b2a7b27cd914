// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Time evolution, steady states, stochastic dephasing and observables.

mod integrator;
mod noise;
mod steady;

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::lindblad::Lindbladian;
use crate::state::{Basis, DensityMatrix};
use crate::{Error, Result};

pub use crate::state::{fidelity, trace_distance};
pub use integrator::{integrate, linear_grid, SolverConfig, SolverStats};
pub use noise::{ou_sample, trajectory_average, NoiseTerm, OUNoise, OuProcess, TrajectoryConfig};
pub use steady::{steady_state, SteadyMethod, SteadyOptions, SteadyState};

/// Abort thresholds applied at every output time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonitorLimits {
    pub trace_drift: f64,
    pub min_eigenvalue: f64,
}

impl Default for MonitorLimits {
    fn default() -> Self {
        Self { trace_drift: 1e-6, min_eigenvalue: -1e-6 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    /// Standard error of the mean, for trajectory averages.
    pub stderr: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub columns: Vec<Column>,
}

impl TimeSeries {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn stderr(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).and_then(|c| c.stderr.as_deref())
    }

    pub fn push_column(&mut self, name: impl Into<String>, values: Vec<f64>) {
        self.columns.push(Column { name: name.into(), values, stderr: None });
    }

    /// Header `t_s,<columns>`; every number with 12 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let mut header = vec!["t_s".to_string()];
        for c in &self.columns {
            header.push(c.name.clone());
            if c.stderr.is_some() {
                header.push(format!("{}_stderr", c.name));
            }
        }
        writeln!(w, "{}", header.join(","))?;
        for (i, t) in self.times.iter().enumerate() {
            let mut row = vec![format_sig12(*t)];
            for c in &self.columns {
                row.push(format_sig12(c.values[i]));
                if let Some(se) = &c.stderr {
                    row.push(format_sig12(se[i]));
                }
            }
            writeln!(w, "{}", row.join(","))?;
        }
        Ok(())
    }
}

pub fn format_sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// What to record at each output time.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    /// Named target state on the spin space, fidelity column `fidelity_<name>`.
    pub targets: Vec<(String, DVector<C64>)>,
    pub monitors: bool,
}

impl Default for ObservableSet {
    fn default() -> Self {
        Self { targets: Vec::new(), monitors: true }
    }
}

impl ObservableSet {
    pub fn with_target(mut self, name: &str, psi: DVector<C64>) -> Self {
        self.targets.push((name.to_string(), psi));
        self
    }

    pub fn names(&self, basis: &Basis) -> Vec<String> {
        let mut names: Vec<String> = basis.spin_ions.iter().map(|i| format!("P_up_{}", i + 1)).collect();
        names.extend(basis.modes.iter().map(|m| format!("n_mode_{}", m + 1)));
        names.extend(self.targets.iter().map(|(n, _)| format!("fidelity_{n}")));
        if self.monitors {
            names.extend(["trace", "min_eig", "hermiticity"].map(String::from));
            names.extend(basis.modes.iter().map(|m| format!("leak_mode_{}", m + 1)));
        }
        names
    }

    pub fn measure(&self, rho: &DensityMatrix) -> Result<Vec<f64>> {
        let b = &rho.basis;
        let mut out: Vec<f64> = (0..b.n_spins()).map(|s| rho.spin_up_population(s)).collect();
        out.extend((0..b.modes.len()).map(|k| rho.mean_occupation(k)));
        let spins = if b.modes.is_empty() { rho.matrix.clone() } else { rho.reduce_spins().matrix };
        for (_, psi) in &self.targets {
            out.push(fidelity(&spins, psi)?);
        }
        if self.monitors {
            out.push(rho.trace().re);
            out.push(rho.min_eigenvalue());
            out.push(rho.hermiticity_error());
            out.extend((0..b.modes.len()).map(|k| rho.top_fock_population(k)));
        }
        Ok(out)
    }
}

fn check_monitors(t: f64, rho: &DensityMatrix, limits: &MonitorLimits) -> Result<()> {
    let drift = (rho.trace().re - 1.0).abs();
    if drift > limits.trace_drift {
        return Err(Error::InvariantViolation { t, what: format!("trace drift {drift:.3e}") });
    }
    let me = rho.min_eigenvalue();
    if me < limits.min_eigenvalue {
        return Err(Error::InvariantViolation { t, what: format!("minimum eigenvalue {me:.3e}") });
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct Evolution {
    pub series: TimeSeries,
    pub final_state: DensityMatrix,
    pub stats: SolverStats,
    /// States at the output grid, when requested.
    pub states: Vec<DensityMatrix>,
}

/// Adaptive evolution of `rho0` with observables on `cfg.output_grid`.
pub fn evolve(gen: &Lindbladian, rho0: &DensityMatrix, cfg: &SolverConfig, obs: &ObservableSet, keep_states: bool) -> Result<Evolution> {
    evolve_with_limits(gen, rho0, cfg, obs, keep_states, &MonitorLimits::default())
}

pub fn evolve_with_limits(
    gen: &Lindbladian,
    rho0: &DensityMatrix,
    cfg: &SolverConfig,
    obs: &ObservableSet,
    keep_states: bool,
    limits: &MonitorLimits,
) -> Result<Evolution> {
    if gen.dim() != rho0.dim() {
        return Err(Error::DimensionMismatch { expected: gen.dim(), got: rho0.dim() });
    }
    let names = obs.names(&rho0.basis);
    let mut values: Vec<Vec<f64>> = vec![Vec::with_capacity(cfg.output_grid.len()); names.len()];
    let mut states = Vec::new();
    let basis = rho0.basis.clone();
    let (last, stats) = integrate(gen, &rho0.matrix, 0.0, cfg, |_, t, m| {
        let rho = DensityMatrix { matrix: m.clone(), basis: basis.clone() };
        if obs.monitors {
            check_monitors(t, &rho, limits)?;
        }
        for (col, v) in values.iter_mut().zip(obs.measure(&rho)?) {
            col.push(v);
        }
        if keep_states {
            states.push(rho);
        }
        Ok(())
    })?;
    let series = TimeSeries {
        times: cfg.output_grid.clone(),
        columns: names.into_iter().zip(values).map(|(name, values)| Column { name, values, stderr: None }).collect(),
    };
    Ok(Evolution { series, final_state: DensityMatrix { matrix: last, basis }, stats, states })
}

/// Evolves `rho` (given at `t0`) to each time in `times`, returning the states.
pub fn propagate(gen: &Lindbladian, rho: &DMatrix<C64>, t0: f64, times: &[f64], cfg: &SolverConfig) -> Result<Vec<DMatrix<C64>>> {
    let mut out = Vec::with_capacity(times.len());
    let c = SolverConfig { output_grid: times.to_vec(), ..cfg.clone() };
    integrate(gen, rho, t0, &c, |_, _, m| {
        out.push(m.clone());
        Ok(())
    })?;
    Ok(out)
}

/// Maximum of a unimodal `f` on `[a, b]` by golden-section search.
pub fn golden_section_max<F: FnMut(f64) -> Result<f64>>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc > fd { (c, fc) } else { (d, fd) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityOptimum {
    pub time: f64,
    pub fidelity: f64,
}

/// Best fidelity with `psi` inside `[t_lo, t_hi]`: grid scan of the stored states, then
/// golden-section refinement between the neighbouring grid points.
pub fn optimize_fidelity(gen: &Lindbladian, evolution: &Evolution, psi: &DVector<C64>, window: (f64, f64), cfg: &SolverConfig) -> Result<FidelityOptimum> {
    let times = &evolution.series.times;
    if evolution.states.len() != times.len() {
        return Err(Error::InvalidInput("fidelity optimisation needs the stored states".into()));
    }
    let fid = |rho: &DensityMatrix| -> Result<f64> {
        let s = if rho.basis.modes.is_empty() { rho.matrix.clone() } else { rho.reduce_spins().matrix };
        fidelity(&s, psi)
    };
    let mut best: Option<(usize, f64)> = None;
    for (i, &t) in times.iter().enumerate() {
        if t < window.0 || t > window.1 {
            continue;
        }
        let f = fid(&evolution.states[i])?;
        if best.map_or(true, |(_, bf)| f > bf) {
            best = Some((i, f));
        }
    }
    let (i, f_grid) = best.ok_or_else(|| Error::InvalidInput("no output time inside the optimisation window".into()))?;
    let lo = if i > 0 { i - 1 } else { i };
    let hi = (i + 1).min(times.len() - 1);
    if lo == hi {
        return Ok(FidelityOptimum { time: times[i], fidelity: f_grid });
    }
    let basis = evolution.states[lo].basis.clone();
    let start = evolution.states[lo].matrix.clone();
    let t0 = times[lo];
    let (t_opt, f_opt) = golden_section_max(
        |t| {
            if t <= t0 {
                return fid(&evolution.states[lo]);
            }
            let m = propagate(gen, &start, t0, &[t], cfg)?.pop().unwrap();
            fid(&DensityMatrix { matrix: m, basis: basis.clone() })
        },
        t0,
        times[hi],
        1e-6 * (times[hi] - t0).max(f64::MIN_POSITIVE) + 1e-3 * (times[hi] - t0),
    )?;
    Ok(if f_opt >= f_grid { FidelityOptimum { time: t_opt, fidelity: f_opt } } else { FidelityOptimum { time: times[i], fidelity: f_grid } })
}
