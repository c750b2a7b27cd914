// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scenario files.
//!
//! JSON objects with unknown keys rejected. Frequencies are given as `<name>_over_2pi_mhz`
//! (ordinary frequency in MHz), rates of ion-chain physics in their natural units as the
//! key suffix says, times in seconds. Mode and ion numbers are 1-based.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub name: String,
    #[serde(default)]
    pub description: String,
    pub chain: ChainSpec,
    #[serde(default)]
    pub cooling: Option<CoolingSpec>,
    #[serde(default)]
    pub drive: Option<DriveSpec>,
    #[serde(default)]
    pub heating: HeatingSpecCfg,
    #[serde(default)]
    pub model: ModelKind,
    #[serde(default)]
    pub ising: Option<IsingSpec>,
    #[serde(default)]
    pub fock: FockSpec,
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub steady: SteadySpec,
    #[serde(default)]
    pub initial_state: InitialSpec,
    #[serde(default)]
    pub targets: Vec<Target>,
    #[serde(default)]
    pub outputs: OutputSpec,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub sweep: Option<SweepSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub species: Vec<SpeciesCfg>,
    /// Trap frequency of the qubit species.
    pub omega_z_over_2pi_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SpeciesCfg {
    /// `"Mg25"` (qubit) or `"Mg24"` (coolant).
    Named(String),
    Custom {
        label: String,
        mass_amu: f64,
        role: RoleCfg,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoleCfg {
    Qubit,
    Coolant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoolingSpec {
    pub omega_tau_over_gamma_tau: f64,
    pub delta_tau_over_gamma_tau: f64,
    pub gamma_tau_over_2pi_mhz: f64,
    #[serde(default = "default_wavelength")]
    pub wavelength_nm: f64,
    /// Projection of the cooling wavevector on the trap axis.
    #[serde(default = "one")]
    pub projection: f64,
    /// Coolant Lamb-Dicke parameters per mode, overriding the wavelength.
    #[serde(default)]
    pub eta_tau: Option<Vec<f64>>,
}

fn default_wavelength() -> f64 {
    ionsim_core::cooling::MG24_COOLING_WAVELENGTH * 1e9
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct HeatingSpecCfg {
    /// Anomalous heating of every mode.
    #[serde(default)]
    pub phonons_per_ms: f64,
    #[serde(default)]
    pub per_mode_phonons_per_ms: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    /// Driven ions; defaults to every qubit ion.
    #[serde(default)]
    pub qubits: Option<Vec<usize>>,
    /// Optical phase difference `pπ` between the two driven ions.
    #[serde(default)]
    pub parity: i64,
    /// Mode the beat note is placed next to; defaults to the highest mode.
    #[serde(default)]
    pub target_mode: Option<usize>,
    /// Detuning from the target mode; the other modes follow from the spectrum.
    #[serde(default)]
    pub delta_over_2pi_mhz: Option<f64>,
    #[serde(default)]
    pub deltas_over_2pi_mhz: Option<Vec<f64>>,
    /// Qubit Lamb-Dicke parameter on `eta_reference_mode`; scaled to the other modes.
    #[serde(default)]
    pub eta_reference: Option<f64>,
    #[serde(default = "one_usize")]
    pub eta_reference_mode: usize,
    #[serde(default)]
    pub eta: Option<Vec<f64>>,
    #[serde(default)]
    pub omega_sigma_over_2pi_mhz: Option<f64>,
    /// `Ω_σ η_target = x · W_target`.
    #[serde(default)]
    pub omega_sigma_eta_over_w: Option<f64>,
}

fn one_usize() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    #[default]
    Full,
    Effective,
    Ising,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingSpec {
    pub omega_d_over_2pi_mhz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FockSpec {
    /// Modes kept as oscillators in the full model; the rest act through their
    /// effective spin terms.
    #[serde(default)]
    pub retained_modes: Option<Vec<usize>>,
    /// Cutoff for every retained mode; chosen from the leak threshold when absent.
    #[serde(default)]
    pub n_max: Option<usize>,
    #[serde(default = "default_leak")]
    pub leak_threshold: f64,
}

impl Default for FockSpec {
    fn default() -> Self {
        Self { retained_modes: None, n_max: None, leak_threshold: default_leak() }
    }
}

fn default_leak() -> f64 {
    ionsim_core::fullmodel::DEFAULT_LEAK_THRESHOLD
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMethod {
    /// Average over sampled Ornstein-Uhlenbeck paths.
    #[default]
    Trajectories,
    /// Deterministic dressed-noise terms of the driven Ising model.
    Dressed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    pub gamma_d_over_2pi_mhz: f64,
    #[serde(default)]
    pub tau_c_s: Option<f64>,
    /// `τ_c Γ_d`, an alternative to `tau_c_s`.
    #[serde(default)]
    pub tau_c_times_gamma_d: Option<f64>,
    #[serde(default = "default_n_traj")]
    pub n_traj: usize,
    #[serde(default = "yes")]
    pub independent: bool,
    #[serde(default)]
    pub method: NoiseMethod,
}

fn default_n_traj() -> usize {
    200
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "default_rtol")]
    pub rel_tol: f64,
    #[serde(default = "default_atol")]
    pub abs_tol: f64,
    #[serde(default = "default_t_end")]
    pub t_end_s: f64,
    #[serde(default = "default_points")]
    pub n_points: usize,
    #[serde(default)]
    pub max_step_s: Option<f64>,
}

fn default_rtol() -> f64 {
    1e-8
}
fn default_atol() -> f64 {
    1e-10
}
fn default_t_end() -> f64 {
    1e-3
}
fn default_points() -> usize {
    101
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self { rel_tol: default_rtol(), abs_tol: default_atol(), t_end_s: default_t_end(), n_points: default_points(), max_step_s: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SteadySpec {
    #[serde(default = "one")]
    pub max_time_s: f64,
    #[serde(default = "default_residual")]
    pub residual_tol: f64,
    #[serde(default = "default_dense")]
    pub max_dense_dim: usize,
}

fn default_residual() -> f64 {
    1e-10
}
fn default_dense() -> usize {
    16
}

impl Default for SteadySpec {
    fn default() -> Self {
        Self { max_time_s: 1.0, residual_tol: default_residual(), max_dense_dim: default_dense() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhononInit {
    /// Thermal at the cooling fixed point.
    #[default]
    Thermal,
    Ground,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// Product state over `u`, `d`, `+`, `-` per driven ion, or a named two-spin state.
    #[serde(default = "default_spins")]
    pub spins: String,
    #[serde(default)]
    pub phonons: PhononInit,
}

fn default_spins() -> String {
    "ud".into()
}

impl Default for InitialSpec {
    fn default() -> Self {
        Self { spins: default_spins(), phonons: PhononInit::Thermal }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    PsiB,
    PhiMinus,
    PhiPlus,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::PsiB => "psi_b",
            Target::PhiMinus => "phi_minus",
            Target::PhiPlus => "phi_plus",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        [Target::PsiB, Target::PhiMinus, Target::PhiPlus].into_iter().find(|t| t.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Run the spin-only model alongside the full one.
    #[serde(default)]
    pub compare_effective: bool,
    #[serde(default)]
    pub optimize_window_s: Option<[f64; 2]>,
    /// Defaults to the first target.
    #[serde(default)]
    pub optimize_target: Option<Target>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SweepCommand {
    #[default]
    Cooling,
    Evolve,
    Steady,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Dotted path of a numeric key, e.g. `cooling.omega_tau_over_gamma_tau`.
    pub param: String,
    pub values: Vec<f64>,
    #[serde(default)]
    pub command: SweepCommand,
}

/// Loads and validates; nothing is written on failure.
pub fn load(path: &Path) -> Result<(Scenario, Value), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    parse(&text).map_err(|e| match e {
        CliError::Config(m) => CliError::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

pub fn parse(text: &str) -> Result<(Scenario, Value), CliError> {
    let value: Value = serde_json::from_str(text).map_err(|e| CliError::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
    let sc = from_value(&value)?;
    Ok((sc, value))
}

pub fn from_value(value: &Value) -> Result<Scenario, CliError> {
    // Round-trip through text so schema errors carry a position.
    let text = serde_json::to_string_pretty(value).expect("serializable");
    let sc: Scenario = serde_json::from_str(&text).map_err(|e| CliError::Config(format!("line {} column {}: {e}", e.line(), e.column())))?;
    sc.validate()?;
    Ok(sc)
}

/// Replaces the number at a dotted path.
pub fn set_path(value: &mut Value, path: &str, x: f64) -> Result<(), CliError> {
    let mut cur = value;
    let parts: Vec<&str> = path.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        let last = k + 1 == parts.len();
        cur = match cur {
            Value::Object(map) => {
                if last {
                    if !map.get(*part).is_some_and(Value::is_number) && map.contains_key(*part) {
                        return Err(CliError::Config(format!("sweep parameter '{path}' is not a number")));
                    }
                    map.insert((*part).to_string(), serde_json::json!(x));
                    return Ok(());
                }
                map.get_mut(*part).ok_or_else(|| CliError::Config(format!("sweep parameter '{path}': no key '{part}'")))?
            }
            Value::Array(items) => {
                let i: usize = part.parse().map_err(|_| CliError::Config(format!("sweep parameter '{path}': '{part}' is not an index")))?;
                let len = items.len();
                let slot = items.get_mut(i).ok_or_else(|| CliError::Config(format!("sweep parameter '{path}': index {i} out of range ({len})")))?;
                if last {
                    *slot = serde_json::json!(x);
                    return Ok(());
                }
                slot
            }
            _ => return Err(CliError::Config(format!("sweep parameter '{path}': '{part}' is not inside an object"))),
        };
    }
    Err(CliError::Config("empty sweep parameter".into()))
}

fn positive(x: f64, what: &str) -> Result<(), CliError> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} must be positive and finite, got {x}")))
    }
}

fn finite(x: f64, what: &str) -> Result<(), CliError> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} must be finite")))
    }
}

fn non_negative(x: f64, what: &str) -> Result<(), CliError> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{what} must be non-negative and finite, got {x}")))
    }
}

impl Scenario {
    /// Checks that do not need the crystal.
    pub fn validate(&self) -> Result<(), CliError> {
        let cfg = |m: &str| Err(CliError::Config(m.to_string()));
        if self.chain.species.is_empty() {
            return cfg("chain.species is empty");
        }
        for s in &self.chain.species {
            match s {
                SpeciesCfg::Named(n) if species_by_name(n).is_none() => {
                    return Err(CliError::Config(format!("unknown species '{n}' (known: Mg25, Mg24)")));
                }
                SpeciesCfg::Custom { mass_amu, .. } => positive(*mass_amu, "chain.species.mass_amu")?,
                _ => {}
            }
        }
        positive(self.chain.omega_z_over_2pi_mhz, "chain.omega_z_over_2pi_mhz")?;
        if let Some(c) = &self.cooling {
            non_negative(c.omega_tau_over_gamma_tau, "cooling.omega_tau_over_gamma_tau")?;
            finite(c.delta_tau_over_gamma_tau, "cooling.delta_tau_over_gamma_tau")?;
            positive(c.gamma_tau_over_2pi_mhz, "cooling.gamma_tau_over_2pi_mhz")?;
            positive(c.wavelength_nm, "cooling.wavelength_nm")?;
            finite(c.projection, "cooling.projection")?;
            if let Some(e) = &c.eta_tau {
                e.iter().try_for_each(|x| non_negative(*x, "cooling.eta_tau"))?;
            }
        }
        non_negative(self.heating.phonons_per_ms, "heating.phonons_per_ms")?;
        if let Some(v) = &self.heating.per_mode_phonons_per_ms {
            v.iter().try_for_each(|x| non_negative(*x, "heating.per_mode_phonons_per_ms"))?;
        }
        if let Some(d) = &self.drive {
            if d.delta_over_2pi_mhz.is_some() == d.deltas_over_2pi_mhz.is_some() {
                return cfg("drive needs exactly one of delta_over_2pi_mhz and deltas_over_2pi_mhz");
            }
            if let Some(x) = d.delta_over_2pi_mhz {
                finite(x, "drive.delta_over_2pi_mhz")?;
            }
            if let Some(v) = &d.deltas_over_2pi_mhz {
                v.iter().try_for_each(|x| finite(*x, "drive.deltas_over_2pi_mhz"))?;
            }
            if d.omega_sigma_over_2pi_mhz.is_some() == d.omega_sigma_eta_over_w.is_some() {
                return cfg("drive needs exactly one of omega_sigma_over_2pi_mhz and omega_sigma_eta_over_w");
            }
            if let Some(x) = d.omega_sigma_over_2pi_mhz.or(d.omega_sigma_eta_over_w) {
                non_negative(x, "drive Rabi frequency")?;
            }
            if d.eta_reference.is_some() == d.eta.is_some() {
                return cfg("drive needs exactly one of eta_reference and eta");
            }
            if let Some(x) = d.eta_reference {
                positive(x, "drive.eta_reference")?;
            }
            if let Some(v) = &d.eta {
                v.iter().try_for_each(|x| non_negative(*x, "drive.eta"))?;
            }
            if d.eta_reference_mode == 0 || d.target_mode == Some(0) {
                return cfg("mode numbers start at 1");
            }
            if let Some(q) = &d.qubits {
                if q.contains(&0) {
                    return cfg("drive.qubits are numbered from 1");
                }
                let mut s = q.clone();
                s.sort_unstable();
                s.dedup();
                if s.len() != q.len() || q.is_empty() {
                    return cfg("drive.qubits must be distinct and non-empty");
                }
            }
        }
        if self.model == ModelKind::Ising && self.ising.is_none() {
            return cfg("model 'ising' needs an 'ising' block with omega_d_over_2pi_mhz");
        }
        if let Some(i) = &self.ising {
            positive(i.omega_d_over_2pi_mhz, "ising.omega_d_over_2pi_mhz")?;
        }
        if let Some(r) = &self.fock.retained_modes {
            if r.is_empty() || r.contains(&0) {
                return cfg("fock.retained_modes must be non-empty and numbered from 1");
            }
        }
        if self.fock.n_max == Some(0) {
            return cfg("fock.n_max must be at least 1");
        }
        positive(self.fock.leak_threshold, "fock.leak_threshold")?;
        if let Some(n) = &self.noise {
            non_negative(n.gamma_d_over_2pi_mhz, "noise.gamma_d_over_2pi_mhz")?;
            match (n.tau_c_s, n.tau_c_times_gamma_d) {
                (Some(t), None) => positive(t, "noise.tau_c_s")?,
                (None, Some(x)) => {
                    positive(x, "noise.tau_c_times_gamma_d")?;
                    positive(n.gamma_d_over_2pi_mhz, "noise.gamma_d_over_2pi_mhz")?;
                }
                _ => return cfg("noise needs exactly one of tau_c_s and tau_c_times_gamma_d"),
            }
            if n.method == NoiseMethod::Trajectories && n.n_traj < 2 {
                return cfg("noise.n_traj must be at least 2");
            }
            if n.method == NoiseMethod::Dressed && self.model != ModelKind::Ising {
                return cfg("dressed noise is only defined for model 'ising'");
            }
        }
        let s = &self.solver;
        positive(s.rel_tol, "solver.rel_tol")?;
        positive(s.abs_tol, "solver.abs_tol")?;
        positive(s.t_end_s, "solver.t_end_s")?;
        if s.n_points < 2 {
            return cfg("solver.n_points must be at least 2");
        }
        if let Some(h) = s.max_step_s {
            positive(h, "solver.max_step_s")?;
        }
        positive(self.steady.max_time_s, "steady.max_time_s")?;
        positive(self.steady.residual_tol, "steady.residual_tol")?;
        let spins = &self.initial_state.spins;
        if Target::from_name(spins).is_none() && (spins.is_empty() || !spins.chars().all(|c| "ud+-".contains(c))) {
            return Err(CliError::Config(format!("initial_state.spins '{spins}' is neither a u/d/+/- pattern nor a named state")));
        }
        if let Some([a, b]) = self.outputs.optimize_window_s {
            if !(a >= 0.0 && b > a && b.is_finite()) {
                return cfg("outputs.optimize_window_s must be an increasing pair of times");
            }
            if self.targets.is_empty() && self.outputs.optimize_target.is_none() {
                return cfg("fidelity optimisation needs a target");
            }
        }
        if let Some(sw) = &self.sweep {
            if sw.values.is_empty() {
                return cfg("sweep.values is empty");
            }
            sw.values.iter().try_for_each(|x| finite(*x, "sweep.values"))?;
        }
        Ok(())
    }
}

pub fn species_by_name(name: &str) -> Option<ionsim_core::crystal::IonSpecies> {
    use ionsim_core::crystal::IonSpecies;
    match name {
        "Mg25" | "25Mg+" => Some(IonSpecies::mg25_qubit()),
        "Mg24" | "24Mg+" => Some(IonSpecies::mg24_coolant()),
        _ => None,
    }
}
