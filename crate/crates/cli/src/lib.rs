// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Scenario-driven front end: modes, cooling tables, time evolution, stationary states
//! and parameter sweeps, each run leaving a manifest next to its results.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod scenario;
pub mod setup;


use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

pub use error::{CliError, CliResult};
use scenario::SweepCommand;

#[derive(Debug, Parser)]
#[command(name = "ionsim", version, about = "Dissipation-assisted spin dynamics in sympathetically cooled ion crystals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Normal-mode frequencies and participation vectors.
    Modes(Common),
    /// Cooling rates, occupations and coherence ratios per mode.
    Cooling(Common),
    /// Time evolution of the configured model.
    Evolve(Common),
    /// Stationary state of the configured model.
    Steady(Common),
    /// Repeats a command over a grid of one scenario parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dotted key path, e.g. cooling.omega_tau_over_gamma_tau.
        #[arg(long)]
        param: Option<String>,
        /// Comma-separated grid.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        values: Option<Vec<f64>>,
        /// Command evaluated at each grid point.
        #[arg(long, value_enum)]
        run: Option<SweepCommand>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Modes(c) | Command::Cooling(c) | Command::Evolve(c) | Command::Steady(c) => c,
            Command::Sweep { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Modes(_) => "modes",
            Command::Cooling(_) => "cooling",
            Command::Evolve(_) => "evolve",
            Command::Steady(_) => "steady",
            Command::Sweep { .. } => "sweep",
        }
    }
}

/// Runs one invocation and returns the files written, manifest last.
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let common = cli.command.common();
    let (mut sc, raw) = scenario::load(&common.config)?;
    if let Some(seed) = common.seed {
        sc.seed = seed;
    }
    if let Command::Sweep { param, values, run, .. } = &cli.command {
        if param.is_some() || values.is_some() || run.is_some() {
            let base = sc.sweep.clone();
            let param = param.clone().or_else(|| base.as_ref().map(|b| b.param.clone()));
            let values = values.clone().or_else(|| base.as_ref().map(|b| b.values.clone()));
            let (Some(param), Some(values)) = (param, values) else {
                return Err(CliError::Config("sweep needs --param and --values or a 'sweep' block".into()));
            };
            let command = run.or(base.map(|b| b.command)).unwrap_or_default();
            sc.sweep = Some(scenario::SweepSpec { param, values, command });
            sc.validate()?;
        }
    }
    let jobs = match common.jobs {
        Some(0) => return Err(CliError::Config("--jobs must be at least 1".into())),
        Some(j) => j,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().map_err(|e| CliError::Numerical(e.to_string()))?;
    let outputs = pool.install(|| match &cli.command {
        Command::Modes(_) => commands::modes(&sc),
        Command::Cooling(_) => commands::cooling(&sc),
        Command::Evolve(_) => commands::evolve_cmd(&sc),
        Command::Steady(_) => commands::steady(&sc),
        Command::Sweep { .. } => commands::sweep(&sc, &raw),
    })?;
    let manifest = manifest::build(cli.command.name(), &sc, &outputs);
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("serializable");
    bytes.push(b'\n');
    write_all(&common.out, outputs.into_iter().chain(std::iter::once(("manifest.json".to_string(), bytes))))
}

fn write_all(dir: &Path, files: impl Iterator<Item = commands::Artifact>) -> CliResult<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    for (name, bytes) in files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        written.push(path);
    }
    Ok(written)
}
