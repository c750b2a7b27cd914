// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Turns a validated scenario into crystal, cooling rates, drive and generators.

use ionsim_core::cooling::{apply_anomalous_heating, mode_cooling_rates, CoolingLaser, CoolingRates, HeatingSpec};
use ionsim_core::crystal::{compute_modes, solve_equilibrium, IonChain, IonSpecies, NormalModes, Role};
use ionsim_core::dynamics::SolverConfig;
use ionsim_core::effective::{
    build_effective_liouvillian, build_ising_liouvillian, dressed_noise_params, spectator_model, sw_flipflop_params, sw_ising_params, virtual_exchange,
    DrivenIsingModel, EffectiveSpinModel,
};
use ionsim_core::fullmodel::{eta_from_reference, parity_phases, single_note_detunings, FockCutoff, RamanDrive, SpinPhononLiouvillian};
use ionsim_core::state::{thermal_populations, Basis, DensityMatrix, TwoSpinState};
use ionsim_core::units::{mhz, per_ms};
use ionsim_core::{Lindbladian, C64};
use nalgebra::{DMatrix, DVector};

use crate::error::{CliError, CliResult};
use crate::scenario::{ModelKind, NoiseMethod, NoiseSpec, PhononInit, RoleCfg, Scenario, SpeciesCfg, Target};

pub struct Crystal {
    pub chain: IonChain,
    pub modes: NormalModes,
}

pub fn crystal(sc: &Scenario) -> CliResult<Crystal> {
    let ions = sc
        .chain
        .species
        .iter()
        .map(|s| match s {
            SpeciesCfg::Named(n) => crate::scenario::species_by_name(n).ok_or_else(|| CliError::Config(format!("unknown species '{n}'"))),
            SpeciesCfg::Custom { label, mass_amu, role } => {
                let role = match role {
                    RoleCfg::Qubit => Role::Qubit,
                    RoleCfg::Coolant => Role::Coolant,
                };
                Ok(IonSpecies::new(label.clone(), *mass_amu, role)?)
            }
        })
        .collect::<CliResult<Vec<_>>>()?;
    let chain = IonChain::new(ions, mhz(sc.chain.omega_z_over_2pi_mhz))?;
    let eq = solve_equilibrium(&chain)?;
    let modes = compute_modes(&chain, &eq)?;
    Ok(Crystal { chain, modes })
}

pub struct Cooling {
    pub laser: CoolingLaser,
    /// Laser cooling only.
    pub bare: CoolingRates,
    pub heating: HeatingSpec,
    /// With anomalous heating folded into Γ⁺.
    pub rates: CoolingRates,
}

pub fn cooling(sc: &Scenario, cr: &Crystal) -> CliResult<Cooling> {
    let spec = sc.cooling.as_ref().ok_or_else(|| CliError::Config("this command needs a 'cooling' block".into()))?;
    let g = mhz(spec.gamma_tau_over_2pi_mhz);
    let (omega, delta) = (spec.omega_tau_over_gamma_tau * g, spec.delta_tau_over_gamma_tau * g);
    let n_modes = cr.modes.len();
    let laser = match &spec.eta_tau {
        Some(eta) => {
            if eta.len() != n_modes {
                return Err(CliError::Config(format!("cooling.eta_tau has {} entries for {n_modes} modes", eta.len())));
            }
            let coolant_indices = cr.chain.indices_with_role(Role::Coolant);
            if coolant_indices.is_empty() {
                return Err(CliError::Config("chain has no coolant ion".into()));
            }
            let laser = CoolingLaser { omega_tau: omega, delta_tau: delta, gamma_tau: g, eta_tau: eta.clone(), coolant_indices };
            laser.validate(&cr.modes)?;
            laser
        }
        None => CoolingLaser::from_wavelength(&cr.chain, &cr.modes, spec.wavelength_nm * 1e-9, spec.projection, omega, delta, g)?,
    };
    let bare = mode_cooling_rates(&laser, &cr.modes)?;
    let heating = match &sc.heating.per_mode_phonons_per_ms {
        Some(v) if v.len() != n_modes => {
            return Err(CliError::Config(format!("heating.per_mode_phonons_per_ms has {} entries for {n_modes} modes", v.len())));
        }
        Some(v) => HeatingSpec { per_mode: v.iter().map(|&x| per_ms(x)).collect() },
        None => HeatingSpec::uniform(per_ms(sc.heating.phonons_per_ms), n_modes),
    };
    let rates = apply_anomalous_heating(&bare, &heating)?;
    Ok(Cooling { laser, bare, heating, rates })
}

fn mode_index(m: usize, n_modes: usize, what: &str) -> CliResult<usize> {
    if m == 0 || m > n_modes {
        return Err(CliError::Config(format!("{what} {m} is out of range (modes 1..={n_modes})")));
    }
    Ok(m - 1)
}

/// Per-mode `δₙ` (rad/s), when the scenario has a drive.
pub fn detunings(sc: &Scenario, modes: &NormalModes) -> CliResult<Option<Vec<f64>>> {
    let Some(d) = &sc.drive else { return Ok(None) };
    let n_modes = modes.len();
    if let Some(v) = &d.deltas_over_2pi_mhz {
        if v.len() != n_modes {
            return Err(CliError::Config(format!("drive.deltas_over_2pi_mhz has {} entries for {n_modes} modes", v.len())));
        }
        return Ok(Some(v.iter().map(|&x| mhz(x)).collect()));
    }
    let target = mode_index(d.target_mode.unwrap_or(n_modes), n_modes, "drive.target_mode")?;
    let delta = d.delta_over_2pi_mhz.expect("validated");
    Ok(Some(single_note_detunings(modes, target, mhz(delta))))
}

pub fn driven_ions(sc: &Scenario, chain: &IonChain) -> CliResult<Vec<usize>> {
    let given = sc.drive.as_ref().and_then(|d| d.qubits.clone());
    let ions = match given {
        Some(q) => q.into_iter().map(|i| i - 1).collect::<Vec<_>>(),
        None => chain.indices_with_role(Role::Qubit),
    };
    if ions.is_empty() {
        return Err(CliError::Config("no driven ions: the chain has no qubit species and drive.qubits is absent".into()));
    }
    if let Some(&bad) = ions.iter().find(|&&i| i >= chain.len()) {
        return Err(CliError::Config(format!("drive.qubits entry {} is out of range for {} ions", bad + 1, chain.len())));
    }
    Ok(ions)
}

pub fn drive(sc: &Scenario, cr: &Crystal, rates: &CoolingRates) -> CliResult<RamanDrive> {
    let d = sc.drive.as_ref().ok_or_else(|| CliError::Config("this command needs a 'drive' block".into()))?;
    let n_modes = cr.modes.len();
    let sigma_indices = driven_ions(sc, &cr.chain)?;
    let detunings = detunings(sc, &cr.modes)?.expect("drive present");
    let eta_sigma = match (&d.eta, d.eta_reference) {
        (Some(v), _) if v.len() != n_modes => return Err(CliError::Config(format!("drive.eta has {} entries for {n_modes} modes", v.len()))),
        (Some(v), _) => v.clone(),
        (None, Some(eta_ref)) => {
            let r = mode_index(d.eta_reference_mode, n_modes, "drive.eta_reference_mode")?;
            eta_from_reference(&cr.modes, cr.chain.ions[sigma_indices[0]].mass, r, eta_ref)
        }
        (None, None) => unreachable!("validated"),
    };
    let omega_sigma = match (d.omega_sigma_over_2pi_mhz, d.omega_sigma_eta_over_w) {
        (Some(x), _) => mhz(x),
        (None, Some(x)) => {
            let target = mode_index(d.target_mode.unwrap_or(n_modes), n_modes, "drive.target_mode")?;
            let w = rates.w(target);
            if w <= 0.0 {
                return Err(ionsim_core::Error::NetHeating { mode: target, w }.into());
            }
            if eta_sigma[target] <= 0.0 {
                return Err(CliError::Config(format!("drive.omega_sigma_eta_over_w needs a non-zero eta on mode {}", target + 1)));
            }
            x * w / eta_sigma[target]
        }
        (None, None) => unreachable!("validated"),
    };
    let drive = RamanDrive { omega_sigma, phases: parity_phases(sigma_indices.len(), d.parity), sigma_indices, eta_sigma, detunings };
    drive.validate(&cr.modes)?;
    Ok(drive)
}

pub fn solver(sc: &Scenario) -> SolverConfig {
    let s = &sc.solver;
    SolverConfig { rel_tol: s.rel_tol, abs_tol: s.abs_tol, max_step: s.max_step_s.unwrap_or(f64::INFINITY), output_grid: Vec::new() }
        .with_grid(ionsim_core::dynamics::linear_grid(s.t_end_s, s.n_points))
}

/// Spin ket from a `u d + -` pattern or a named two-spin state.
pub fn spin_state(pattern: &str, n_spins: usize) -> CliResult<DVector<C64>> {
    if let Some(t) = Target::from_name(pattern) {
        if n_spins != 2 {
            return Err(CliError::Config(format!("initial state '{pattern}' needs two driven ions, have {n_spins}")));
        }
        return Ok(target_ket(t));
    }
    if pattern.chars().count() != n_spins {
        return Err(CliError::Config(format!("initial_state.spins '{pattern}' has {} symbols for {n_spins} driven ions", pattern.chars().count())));
    }
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = DVector::from_element(1, C64::new(1.0, 0.0));
    for ch in pattern.chars() {
        let (up, down) = match ch {
            'u' => (1.0, 0.0),
            'd' => (0.0, 1.0),
            '+' => (s, s),
            '-' => (s, -s),
            other => return Err(CliError::Config(format!("spin symbol '{other}'"))),
        };
        let one = DVector::from_vec(vec![C64::new(up, 0.0), C64::new(down, 0.0)]);
        psi = psi.kronecker(&one);
    }
    Ok(psi)
}

pub fn target_ket(t: Target) -> DVector<C64> {
    match t {
        Target::PsiB => TwoSpinState::PsiB.ket(),
        Target::PhiMinus => TwoSpinState::PhiMinus.ket(),
        Target::PhiPlus => TwoSpinState::PhiPlus.ket(),
    }
}

pub fn targets(sc: &Scenario, n_spins: usize) -> CliResult<Vec<(String, DVector<C64>)>> {
    if !sc.targets.is_empty() && n_spins != 2 {
        return Err(CliError::Config(format!("two-spin targets need two driven ions, have {n_spins}")));
    }
    Ok(sc.targets.iter().map(|&t| (t.name().to_string(), target_ket(t))).collect())
}

pub struct NoiseParams {
    pub gamma_d: f64,
    pub tau_c: f64,
    pub n_traj: usize,
    pub independent: bool,
    pub method: NoiseMethod,
}

pub fn noise(spec: &NoiseSpec) -> NoiseParams {
    let gamma_d = mhz(spec.gamma_d_over_2pi_mhz);
    let tau_c = spec.tau_c_s.unwrap_or_else(|| spec.tau_c_times_gamma_d.expect("validated") / gamma_d);
    NoiseParams { gamma_d, tau_c, n_traj: spec.n_traj, independent: spec.independent, method: spec.method }
}

/// Everything `evolve` and `steady` need.
pub struct Model {
    pub kind: ModelKind,
    pub generator: Lindbladian,
    pub rho0: DensityMatrix,
    pub drive: RamanDrive,
    pub cooling: Cooling,
    pub crystal: Crystal,
    /// Spin-only flip-flop model summed over all modes.
    pub effective: Option<EffectiveSpinModel>,
    pub ising: Option<DrivenIsingModel>,
    pub cutoff: Option<FockCutoff>,
    pub warnings: Vec<String>,
}

impl Model {
    pub fn spin_basis(&self) -> Basis {
        Basis::spins_only(self.drive.sigma_indices.clone())
    }
}

fn cooled_modes(rates: &CoolingRates) -> Vec<usize> {
    (0..rates.len()).filter(|&n| rates.modes[n].is_cooled()).collect()
}

pub fn build_model(sc: &Scenario) -> CliResult<Model> {
    let crystal = crystal(sc)?;
    let cooling = cooling(sc, &crystal)?;
    let drive = drive(sc, &crystal, &cooling.rates)?;
    let n_spins = drive.sigma_indices.len();
    let n_modes = crystal.modes.len();
    let spin_ket = spin_state(&sc.initial_state.spins, n_spins)?;
    targets(sc, n_spins)?;
    let spin_basis = Basis::spins_only(drive.sigma_indices.clone());
    let spins = DensityMatrix::from_pure(&spin_ket, spin_basis.clone())?;
    let all: Vec<usize> = (0..n_modes).collect();
    let (effective, mut warnings) = spectator_model(&drive, &cooling.rates, &crystal.modes, &all)?;
    match sc.model {
        ModelKind::Effective => {
            let generator = build_effective_liouvillian(&effective)?;
            Ok(Model { kind: sc.model, generator, rho0: spins, drive, cooling, crystal, effective: Some(effective), ising: None, cutoff: None, warnings })
        }
        ModelKind::Ising => {
            let omega_d = mhz(sc.ising.as_ref().expect("validated").omega_d_over_2pi_mhz);
            let cooled = cooled_modes(&cooling.rates);
            let mut model = sw_ising_params(&drive, &cooling.rates, &crystal.modes, &cooled, omega_d)?;
            if let Some(n) = sc.noise.as_ref().filter(|n| n.method == NoiseMethod::Dressed) {
                let p = noise(n);
                let ff = sw_flipflop_params(&drive, &cooling.rates, &crystal.modes, &cooled)?;
                let dt: Vec<f64> = (0..n_modes).map(|k| cooling.rates.modes[k].shifted_detuning(drive.detunings[k])).collect();
                model.dressed = Some(dressed_noise_params(&ff.b_per_mode, &dt, p.tau_c, p.gamma_d, omega_d)?);
            }
            let generator = build_ising_liouvillian(&model)?;
            Ok(Model {
                kind: sc.model,
                generator,
                rho0: spins,
                drive,
                cooling,
                crystal,
                effective: Some(effective),
                ising: Some(model),
                cutoff: None,
                warnings,
            })
        }
        ModelKind::Full => {
            let retained = match &sc.fock.retained_modes {
                Some(r) => r.iter().map(|&m| mode_index(m, n_modes, "fock.retained_modes entry")).collect::<CliResult<Vec<_>>>()?,
                None => FockCutoff::default_retained(&drive.detunings),
            };
            let mut n_max = Vec::with_capacity(retained.len());
            let mut pops = Vec::with_capacity(retained.len());
            for &m in &retained {
                let nbar = cooling.rates.nbar(m);
                let cut = match (sc.fock.n_max, nbar) {
                    (Some(n), _) => n,
                    (None, Some(nb)) => FockCutoff::auto_n_max(nb, sc.fock.leak_threshold),
                    (None, None) => return Err(ionsim_core::Error::NetHeating { mode: m, w: cooling.rates.w(m) }.into()),
                };
                n_max.push(cut);
                pops.push(match (sc.initial_state.phonons, nbar) {
                    (PhononInit::Ground, _) => thermal_populations(0.0, cut),
                    (PhononInit::Thermal, Some(nb)) => thermal_populations(nb, cut),
                    (PhononInit::Thermal, None) => {
                        return Err(CliError::Config(format!("mode {} is not net-cooled, so it has no thermal initial state", m + 1)))
                    }
                });
            }
            let cutoff = FockCutoff::new(retained.clone(), n_max, sc.fock.leak_threshold)?;
            let spectators: Vec<usize> = all.iter().copied().filter(|m| !retained.contains(m)).collect();
            let spec_gen = if spectators.is_empty() {
                None
            } else {
                // Same split as `spectator_model`, whose warnings are already in `warnings`.
                let (cooled, hot): (Vec<usize>, Vec<usize>) = spectators.iter().partition(|&&n| cooling.rates.modes[n].is_cooled());
                let spec =
                    sw_flipflop_params(&drive, &cooling.rates, &crystal.modes, &cooled)?.plus(&virtual_exchange(&drive, &cooling.rates, &crystal.modes, &hot)?);
                Some(build_effective_liouvillian(&spec)?)
            };
            let full = SpinPhononLiouvillian::build(&drive, &crystal.modes, &cooling.bare, &cooling.heating, &cutoff, spec_gen.as_ref())?;
            warnings.extend(full.warnings.iter().cloned());
            let rho0 = DensityMatrix::product(&spins.matrix, &pops, full.basis.clone())?;
            Ok(Model {
                kind: sc.model,
                generator: full.generator,
                rho0,
                drive,
                cooling,
                crystal,
                effective: Some(effective),
                ising: None,
                cutoff: Some(cutoff),
                warnings,
            })
        }
    }
}

/// `½σᶻ` on each driven ion, embedded in `basis`.
pub fn dephasing_terms(basis: &Basis) -> CliResult<Vec<ionsim_core::dynamics::NoiseTerm>> {
    use ionsim_core::ops::sigma_z;
    let space = basis.space();
    (0..basis.n_spins()).map(|s| Ok(ionsim_core::dynamics::NoiseTerm { op: space.embed(&sigma_z(), s)?.scale(C64::new(0.5, 0.0)) })).collect()
}

pub fn complex_json(m: &DMatrix<C64>) -> serde_json::Value {
    let part = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> { (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect() };
    serde_json::json!({ "re": part(|z| z.re), "im": part(|z| z.im) })
}

pub fn real_json(m: &DMatrix<f64>) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect();
    serde_json::json!(rows)
}
