// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Command bodies. Each returns its output files in memory; nothing touches the disk
//! until every computation has succeeded.

use std::f64::consts::PI;

use ionsim_core::cooling::{coherence_ratio, RatioVariant};
use ionsim_core::dynamics::{
    evolve, format_sig12, optimize_fidelity, steady_state, trace_distance, trajectory_average, Evolution, OUNoise, ObservableSet, SteadyMethod, SteadyOptions,
    TimeSeries, TrajectoryConfig,
};
use ionsim_core::effective::build_effective_liouvillian;
use ionsim_core::ops::sigma_x;
use ionsim_core::state::{fidelity, DensityMatrix};
use ionsim_core::units::to_mhz;
use ionsim_core::C64;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::scenario::{self, ModelKind, NoiseMethod, Scenario, SweepCommand};
use crate::setup::{self, complex_json, real_json, Model};

/// One output file.
pub type Artifact = (String, Vec<u8>);

fn csv_line(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

fn num(x: f64) -> String {
    format_sig12(x)
}

fn json_bytes(v: &Value) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}

fn series_bytes(ts: &TimeSeries) -> CliResult<Vec<u8>> {
    let mut buf = Vec::new();
    ts.write_csv(&mut buf)?;
    Ok(buf)
}

/// Mode frequencies and participation vectors.
pub fn modes(sc: &Scenario) -> CliResult<Vec<Artifact>> {
    let cr = setup::crystal(sc)?;
    let n_ions = cr.chain.len();
    let mut header = vec!["mode".to_string(), "omega_over_2pi_mhz".to_string()];
    header.extend((1..=n_ions).map(|i| format!("b_ion_{i}")));
    let mut out = csv_line(&header);
    for n in 0..cr.modes.len() {
        let mut row = vec![(n + 1).to_string(), num(to_mhz(cr.modes.frequencies[n]))];
        row.extend((0..n_ions).map(|i| num(cr.modes.amplitude(i, n))));
        out.push_str(&csv_line(&row));
    }
    Ok(vec![("modes.csv".into(), out.into_bytes())])
}

pub const COOLING_COLUMNS: [&str; 15] = [
    "omega_over_2pi_mhz",
    "eta_tau",
    "gamma_minus_re_rad_s",
    "gamma_minus_im_rad_s",
    "gamma_plus_re_rad_s",
    "gamma_plus_im_rad_s",
    "heating_rad_s",
    "w_rad_s",
    "nbar",
    "lamb_shift_rad_s",
    "delta_rad_s",
    "delta_tilde_rad_s",
    "ratio",
    "ratio_ising",
    "cooled",
];

/// Per-mode rows of [`COOLING_COLUMNS`]; NaN where a quantity is undefined.
pub fn cooling_table(sc: &Scenario) -> CliResult<Vec<Vec<f64>>> {
    let cr = setup::crystal(sc)?;
    let c = setup::cooling(sc, &cr)?;
    let det = setup::detunings(sc, &cr.modes)?;
    let mut rows = Vec::new();
    for n in 0..cr.modes.len() {
        let m = &c.rates.modes[n];
        let delta = det.as_ref().map_or(f64::NAN, |d| d[n]);
        let dt = m.shifted_detuning(delta);
        let ratio = |v| if dt.is_nan() { f64::NAN } else { coherence_ratio(&c.rates, n, dt, v).unwrap_or(f64::NAN) };
        rows.push(vec![
            to_mhz(cr.modes.frequencies[n]),
            c.laser.eta_tau[n],
            m.gamma_minus.re,
            m.gamma_minus.im,
            m.gamma_plus.re,
            m.gamma_plus.im,
            m.anomalous_heating,
            m.w(),
            m.nbar().unwrap_or(f64::NAN),
            m.lamb_shift(),
            delta,
            dt,
            ratio(RatioVariant::FlipFlop),
            ratio(RatioVariant::Ising),
            if m.is_cooled() { 1.0 } else { 0.0 },
        ]);
    }
    Ok(rows)
}

pub fn cooling(sc: &Scenario) -> CliResult<Vec<Artifact>> {
    let rows = cooling_table(sc)?;
    let mut header = vec!["mode".to_string()];
    header.extend(COOLING_COLUMNS.iter().map(|s| s.to_string()));
    let mut out = csv_line(&header);
    for (n, r) in rows.iter().enumerate() {
        let mut row = vec![(n + 1).to_string()];
        row.extend(r.iter().map(|&x| num(x)));
        out.push_str(&csv_line(&row));
    }
    Ok(vec![("cooling.csv".into(), out.into_bytes())])
}

fn model_json(sc: &Scenario, m: &Model) -> Value {
    let rates = &m.cooling.rates;
    let modes: Vec<Value> = (0..m.crystal.modes.len())
        .map(|n| {
            let r = &rates.modes[n];
            let dt = r.shifted_detuning(m.drive.detunings[n]);
            json!({
                "mode": n + 1,
                "omega_over_2pi_mhz": to_mhz(m.crystal.modes.frequencies[n]),
                "w_rad_s": r.w(),
                "nbar": r.nbar(),
                "delta_rad_s": m.drive.detunings[n],
                "delta_tilde_rad_s": dt,
                "ratio": coherence_ratio(rates, n, dt, RatioVariant::FlipFlop).ok(),
                "eta_sigma": m.drive.eta_sigma[n],
            })
        })
        .collect();
    let mut v = json!({
        "model": sc.model,
        "driven_ions": m.drive.sigma_indices.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "omega_sigma_rad_s": m.drive.omega_sigma,
        "dim": m.generator.dim(),
        "modes": modes,
        "warnings": m.warnings,
    });
    if let Some(c) = &m.cutoff {
        v["retained_modes"] = json!(c.retained.iter().map(|k| k + 1).collect::<Vec<_>>());
        v["n_max"] = json!(c.n_max);
    }
    if let Some(e) = &m.effective {
        v["j_rad_s"] = complex_json(&e.j);
        v["gamma_rad_s"] = complex_json(&e.gamma);
        v["gamma_prime_rad_s"] = complex_json(&e.gamma_prime);
        v["b_rad_s"] = json!(e.b());
        if e.n_spins() >= 2 {
            let j = e.j[(0, 1)].norm();
            v["exchange_period_s"] = json!(PI / j);
            v["bell_time_s"] = json!(PI / (4.0 * j));
        }
    }
    if let Some(i) = &m.ising {
        v["jt_rad_s"] = real_json(&i.jt);
        v["gt_rad_s"] = real_json(&i.gt);
        v["omega_d_rad_s"] = json!(i.omega_d);
        if let Some(d) = &i.dressed {
            v["dressed_omega_rad_s"] = json!(d.omega);
            v["dressed_gamma_rad_s"] = json!(d.gamma);
        }
    }
    v
}

fn observables(sc: &Scenario, n_spins: usize) -> CliResult<ObservableSet> {
    let mut obs = ObservableSet::default();
    for (name, psi) in setup::targets(sc, n_spins)? {
        obs = obs.with_target(&name, psi);
    }
    Ok(obs)
}

fn spin_matrix(rho: &DensityMatrix) -> nalgebra::DMatrix<C64> {
    if rho.basis.modes.is_empty() {
        rho.matrix.clone()
    } else {
        rho.reduce_spins().matrix
    }
}

pub fn evolve_cmd(sc: &Scenario) -> CliResult<Vec<Artifact>> {
    let m = setup::build_model(sc)?;
    let cfg = setup::solver(sc);
    let obs = observables(sc, m.drive.sigma_indices.len())?;
    let mut out = Vec::new();
    let info = model_json(sc, &m);
    if let Some(spec) = &sc.noise {
        if spec.method == NoiseMethod::Trajectories {
            let ts = trajectories(sc, &m, &cfg, spec)?;
            out.push(("timeseries.csv".to_string(), series_bytes(&ts)?));
            out.push(("model.json".to_string(), json_bytes(&info)));
            return Ok(out);
        }
    }
    let want_states = sc.outputs.optimize_window_s.is_some() || sc.outputs.compare_effective;
    let ev = evolve(&m.generator, &m.rho0, &cfg, &obs, want_states)?;
    let mut series = ev.series.clone();
    let mut eff_ev: Option<(Evolution, ionsim_core::Lindbladian)> = None;
    if sc.outputs.compare_effective {
        if sc.model != ModelKind::Full {
            return Err(CliError::Config("outputs.compare_effective needs model 'full'".into()));
        }
        let eff = m.effective.as_ref().expect("flip-flop model");
        let gen = build_effective_liouvillian(eff)?;
        let spins = DensityMatrix::new(spin_matrix(&m.rho0), m.spin_basis())?;
        let e = evolve(&gen, &spins, &cfg, &obs, true)?;
        for c in &e.series.columns {
            if c.name.starts_with("P_up_") || c.name.starts_with("fidelity_") {
                series.push_column(format!("{}_eff", c.name), c.values.clone());
            }
        }
        let td = ev.states.iter().zip(&e.states).map(|(a, b)| trace_distance(&spin_matrix(a), &b.matrix)).collect::<Result<Vec<_>, _>>()?;
        series.push_column("trace_distance", td);
        eff_ev = Some((e, gen));
    }
    out.push(("timeseries.csv".to_string(), series_bytes(&series)?));
    out.push(("model.json".to_string(), json_bytes(&info)));
    if let Some([lo, hi]) = sc.outputs.optimize_window_s {
        let target = sc.outputs.optimize_target.or(sc.targets.first().copied()).expect("validated");
        let psi = setup::target_ket(target);
        let best = optimize_fidelity(&m.generator, &ev, &psi, (lo, hi), &cfg)?;
        let mut v = json!({
            "target": target.name(),
            "window_s": [lo, hi],
            "time_s": best.time,
            "fidelity": best.fidelity,
            "infidelity": 1.0 - best.fidelity,
        });
        if let Some((e, gen)) = &eff_ev {
            let b = optimize_fidelity(gen, e, &psi, (lo, hi), &cfg)?;
            v["effective"] = json!({ "time_s": b.time, "fidelity": b.fidelity, "infidelity": 1.0 - b.fidelity });
        }
        out.push(("optimum.json".to_string(), json_bytes(&v)));
    }
    Ok(out)
}

/// Noise-averaged evolution with `P_up_i`, `sx_i` and target fidelities per output time.
fn trajectories(sc: &Scenario, m: &Model, cfg: &ionsim_core::dynamics::SolverConfig, spec: &scenario::NoiseSpec) -> CliResult<TimeSeries> {
    let p = setup::noise(spec);
    let noise = OUNoise { gamma_d: p.gamma_d, tau_c: p.tau_c, seed: sc.seed, independent: p.independent };
    let basis = m.rho0.basis.clone();
    let terms = setup::dephasing_terms(&basis)?;
    let n_spins = basis.n_spins();
    let targets = setup::targets(sc, n_spins)?;
    let space = basis.space();
    let sx: Vec<nalgebra::DMatrix<C64>> = (0..n_spins).map(|s| space.embed(&sigma_x(), s).map(|o| o.to_dense())).collect::<Result<_, _>>()?;
    let mut names: Vec<String> = basis.spin_ions.iter().map(|i| format!("P_up_{}", i + 1)).collect();
    names.extend(basis.spin_ions.iter().map(|i| format!("sx_{}", i + 1)));
    names.extend(targets.iter().map(|(n, _)| format!("fidelity_{n}")));
    let tcfg = TrajectoryConfig { solver: cfg.clone(), n_traj: p.n_traj, max_segment: None };
    let observe = |rho: &nalgebra::DMatrix<C64>| -> Vec<f64> {
        let d = DensityMatrix { matrix: rho.clone(), basis: basis.clone() };
        let mut v: Vec<f64> = (0..n_spins).map(|s| d.spin_up_population(s)).collect();
        v.extend(sx.iter().map(|o| d.expectation(o).re));
        let spins = spin_matrix(&d);
        v.extend(targets.iter().map(|(_, psi)| fidelity(&spins, psi).unwrap_or(f64::NAN)));
        v
    };
    Ok(trajectory_average(&m.generator, &terms, &noise, &m.rho0, &tcfg, &names, observe)?)
}

fn steady_value(sc: &Scenario) -> CliResult<Value> {
    let m = setup::build_model(sc)?;
    if sc.noise.as_ref().is_some_and(|n| n.method == NoiseMethod::Trajectories) {
        return Err(CliError::Config("steady states of noise trajectories are not defined; use method 'dressed' or drop the noise block".into()));
    }
    let opts = SteadyOptions {
        max_dense_dim: sc.steady.max_dense_dim,
        residual_tol: sc.steady.residual_tol,
        max_time: sc.steady.max_time_s,
        ..SteadyOptions::default()
    };
    let ss = steady_state(&m.generator, &m.rho0.basis, Some(&m.rho0), &opts)?;
    let spins = spin_matrix(&ss.state);
    let n_spins = m.drive.sigma_indices.len();
    let mut fids = serde_json::Map::new();
    for (name, psi) in setup::targets(sc, n_spins)? {
        fids.insert(name, json!(fidelity(&spins, &psi)?));
    }
    let basis = &ss.state.basis;
    let pops: Vec<f64> = (0..n_spins).map(|s| ss.state.spin_up_population(s)).collect();
    let occ: serde_json::Map<String, Value> =
        basis.modes.iter().enumerate().map(|(k, m)| (format!("mode_{}", m + 1), json!(ss.state.mean_occupation(k)))).collect();
    Ok(json!({
        "model": sc.model,
        "method": match ss.method { SteadyMethod::NullSpace => "null_space", SteadyMethod::Evolution => "evolution" },
        "null_dim": ss.null_dim,
        "degenerate": ss.is_degenerate(),
        "residual": ss.residual,
        "time_s": ss.time,
        "dim": ss.state.dim(),
        "driven_ions": m.drive.sigma_indices.iter().map(|i| i + 1).collect::<Vec<_>>(),
        "fidelities": fids,
        "spin_up_populations": pops,
        "mean_occupation": occ,
        "min_eig": ss.state.min_eigenvalue(),
        "spin_density_matrix": complex_json(&spins),
        "density_matrix": complex_json(&ss.state.matrix),
    }))
}

pub fn steady(sc: &Scenario) -> CliResult<Vec<Artifact>> {
    Ok(vec![("steady.json".into(), json_bytes(&steady_value(sc)?))])
}

/// Rows of one sweep point, without the parameter column.
fn sweep_point(sc: &Scenario, cmd: SweepCommand) -> CliResult<Vec<Vec<String>>> {
    let mut rows = Vec::new();
    match cmd {
        SweepCommand::Cooling => {
            for (n, r) in cooling_table(sc)?.iter().enumerate() {
                for (name, &x) in COOLING_COLUMNS.iter().zip(r) {
                    rows.push(vec![(n + 1).to_string(), name.to_string(), num(x)]);
                }
            }
        }
        SweepCommand::Evolve => {
            let files = evolve_cmd(sc)?;
            let csv = String::from_utf8(files[0].1.clone()).expect("utf8");
            let mut lines = csv.lines();
            let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
            for line in lines {
                let f: Vec<&str> = line.split(',').collect();
                for (name, x) in header.iter().zip(&f).skip(1) {
                    rows.push(vec![f[0].to_string(), name.to_string(), x.to_string()]);
                }
            }
        }
        SweepCommand::Steady => {
            let v = steady_value(sc)?;
            rows.push(vec!["null_dim".into(), num(v["null_dim"].as_f64().unwrap_or(f64::NAN))]);
            rows.push(vec!["residual".into(), num(v["residual"].as_f64().unwrap_or(f64::NAN))]);
            for (k, f) in v["fidelities"].as_object().into_iter().flatten() {
                rows.push(vec![format!("fidelity_{k}"), num(f.as_f64().unwrap_or(f64::NAN))]);
            }
            for (i, p) in v["spin_up_populations"].as_array().into_iter().flatten().enumerate() {
                rows.push(vec![format!("P_up_{}", v["driven_ions"][i]), num(p.as_f64().unwrap_or(f64::NAN))]);
            }
        }
    }
    Ok(rows)
}

/// Long-format CSV over the sweep grid, in grid order.
pub fn sweep(sc: &Scenario, raw: &Value) -> CliResult<Vec<Artifact>> {
    let spec = sc.sweep.as_ref().ok_or_else(|| CliError::Config("sweep needs a 'sweep' block or --param/--values".into()))?;
    if spec.values.is_empty() {
        return Err(CliError::Config("sweep grid is empty".into()));
    }
    // Validate every grid point before computing any of them.
    let points = spec
        .values
        .iter()
        .map(|&x| {
            let mut v = raw.clone();
            scenario::set_path(&mut v, &spec.param, x)?;
            let mut s = scenario::from_value(&v).map_err(|e| CliError::Config(format!("sweep value {x}: {e}")))?;
            s.seed = sc.seed;
            Ok((x, s))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let results: Vec<Vec<Vec<String>>> = points.par_iter().map(|(_, s)| sweep_point(s, spec.command)).collect::<CliResult<_>>()?;
    let mut header = vec!["param".to_string(), "value".to_string()];
    header.extend(match spec.command {
        SweepCommand::Cooling => ["mode", "quantity", "result"].map(String::from).to_vec(),
        SweepCommand::Evolve => ["t_s", "quantity", "result"].map(String::from).to_vec(),
        SweepCommand::Steady => ["quantity", "result"].map(String::from).to_vec(),
    });
    let mut out = csv_line(&header);
    for ((x, _), rows) in points.iter().zip(results) {
        for r in rows {
            let mut line = vec![spec.param.clone(), num(*x)];
            line.extend(r);
            out.push_str(&csv_line(&line));
        }
    }
    Ok(vec![("sweep.csv".into(), out.into_bytes())])
}
