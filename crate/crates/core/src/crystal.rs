// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Statics and axial normal modes of a linear Coulomb crystal.
//!
//! Positions are solved in units of the Coulomb length
//! `ℓ = (q²e² / (4πε₀ k))^(1/3)` with `k = m_ref ω_z²`. The trap spring constant is
//! the same for every ion, so only the kinetic term knows about the masses.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::units::{AMU, ELEMENTARY_CHARGE, HBAR, MASS_MG24_AMU, MASS_MG25_AMU, VACUUM_PERMITTIVITY};
use crate::{Error, Result};

const NEWTON_TOL: f64 = 1e-12;
const NEWTON_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Role {
    /// Carries the spin qubit.
    Qubit,
    /// Laser-cooled coolant.
    Coolant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IonSpecies {
    pub label: String,
    /// Mass in kg.
    pub mass: f64,
    pub role: Role,
}

impl IonSpecies {
    pub fn new(label: impl Into<String>, mass_amu: f64, role: Role) -> Result<Self> {
        if !(mass_amu > 0.0) || !mass_amu.is_finite() {
            return Err(Error::InvalidInput(format!("ion mass must be positive, got {mass_amu} amu")));
        }
        Ok(Self { label: label.into(), mass: mass_amu * AMU, role })
    }

    pub fn mg25_qubit() -> Self {
        Self { label: "25Mg+".into(), mass: MASS_MG25_AMU * AMU, role: Role::Qubit }
    }

    pub fn mg24_coolant() -> Self {
        Self { label: "24Mg+".into(), mass: MASS_MG24_AMU * AMU, role: Role::Coolant }
    }

    pub fn mass_amu(&self) -> f64 {
        self.mass / AMU
    }
}

#[derive(Debug, Clone)]
pub struct IonChain {
    pub ions: Vec<IonSpecies>,
    /// Axial trap frequency (rad/s) of an ion with `reference_mass`.
    pub omega_z: f64,
    /// kg
    pub reference_mass: f64,
    /// Charge per ion in elementary charges.
    pub charge: u32,
}

impl IonChain {
    /// Chain whose trap frequency is quoted for the first qubit species (or the first ion
    /// if there is none).
    pub fn new(ions: Vec<IonSpecies>, omega_z: f64) -> Result<Self> {
        let reference_mass = ions
            .iter()
            .find(|ion| ion.role == Role::Qubit)
            .or_else(|| ions.first())
            .map(|ion| ion.mass)
            .ok_or_else(|| Error::InvalidInput("an ion chain needs at least one ion".into()))?;
        Self::with_reference_mass(ions, omega_z, reference_mass)
    }

    pub fn with_reference_mass(ions: Vec<IonSpecies>, omega_z: f64, reference_mass: f64) -> Result<Self> {
        if ions.is_empty() {
            return Err(Error::InvalidInput("an ion chain needs at least one ion".into()));
        }
        if !(omega_z > 0.0) || !omega_z.is_finite() {
            return Err(Error::InvalidInput(format!("omega_z must be positive, got {omega_z}")));
        }
        if !(reference_mass > 0.0) {
            return Err(Error::InvalidInput("reference mass must be positive".into()));
        }
        Ok(Self { ions, omega_z, reference_mass, charge: 1 })
    }

    /// ²⁵Mg⁺–²⁴Mg⁺–²⁵Mg⁺ with ω_z referenced to ²⁵Mg⁺.
    pub fn mg_25_24_25(omega_z: f64) -> Self {
        Self::new(vec![IonSpecies::mg25_qubit(), IonSpecies::mg24_coolant(), IonSpecies::mg25_qubit()], omega_z).expect("valid preset")
    }

    pub fn len(&self) -> usize {
        self.ions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ions.is_empty()
    }

    pub fn indices_with_role(&self, role: Role) -> Vec<usize> {
        self.ions.iter().enumerate().filter(|(_, ion)| ion.role == role).map(|(i, _)| i).collect()
    }

    /// Trap spring constant (N/m), shared by all ions.
    pub fn spring_constant(&self) -> f64 {
        self.reference_mass * self.omega_z * self.omega_z
    }

    /// Coulomb length ℓ in meters.
    pub fn length_unit(&self) -> f64 {
        let q = self.charge as f64 * ELEMENTARY_CHARGE;
        (q * q / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY * self.spring_constant())).cbrt()
    }
}

#[derive(Debug, Clone)]
pub struct EquilibriumConfig {
    /// Dimensionless axial coordinates, strictly increasing.
    pub positions: Vec<f64>,
    /// Coulomb length in meters.
    pub length_unit: f64,
    pub residual: f64,
}

impl EquilibriumConfig {
    pub fn positions_m(&self) -> Vec<f64> {
        self.positions.iter().map(|u| u * self.length_unit).collect()
    }
}

/// Net dimensionless force on every ion: `−u_i + Σ_j sgn(u_i − u_j)/(u_i − u_j)²`.
fn forces(u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let mut f = vec![0.0; n];
    for i in 0..n {
        f[i] -= u[i];
        for j in 0..n {
            if i != j {
                let d = u[i] - u[j];
                f[i] += d.signum() / (d * d);
            }
        }
    }
    f
}

/// Hessian of the dimensionless potential `Σ u²/2 + Σ_{i<j} 1/|u_i − u_j|`.
pub fn potential_hessian(u: &[f64]) -> DMatrix<f64> {
    let n = u.len();
    let mut h = DMatrix::zeros(n, n);
    for i in 0..n {
        h[(i, i)] = 1.0;
        for j in 0..n {
            if i != j {
                let c = 2.0 / (u[i] - u[j]).abs().powi(3);
                h[(i, i)] += c;
                h[(i, j)] = -c;
            }
        }
    }
    h
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Newton iteration on the force balance, seeded with equally spaced ions.
pub fn solve_equilibrium(chain: &IonChain) -> Result<EquilibriumConfig> {
    let n = chain.len();
    let length_unit = chain.length_unit();
    if n == 1 {
        return Ok(EquilibriumConfig { positions: vec![0.0], length_unit, residual: 0.0 });
    }

    // Rough width of a harmonic-trap Coulomb chain.
    let half_width = 0.7 * ((n - 1) as f64).powf(0.56) + 0.3;
    let mut u: Vec<f64> = (0..n).map(|i| -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64).collect();

    let mut residual = max_abs(&forces(&u));
    for _ in 0..NEWTON_MAX_ITER {
        if residual < NEWTON_TOL {
            return Ok(EquilibriumConfig { positions: u, length_unit, residual });
        }
        let f = nalgebra::DVector::from_vec(forces(&u));
        let h = potential_hessian(&u);
        let step = h.cholesky().map(|c| c.solve(&f)).ok_or(Error::NoEquilibrium { iterations: 0, residual })?;

        // Backtrack until ordering is kept and the force decreases.
        let mut scale = 1.0;
        loop {
            let trial: Vec<f64> = u.iter().zip(step.iter()).map(|(x, s)| x + scale * s).collect();
            let ordered = trial.windows(2).all(|w| w[1] > w[0]);
            if ordered {
                let r = max_abs(&forces(&trial));
                if r < residual || scale < 1e-6 {
                    u = trial;
                    residual = r;
                    break;
                }
            }
            scale *= 0.5;
            if scale < 1e-12 {
                return Err(Error::NoEquilibrium { iterations: NEWTON_MAX_ITER, residual });
            }
        }
    }
    if residual < NEWTON_TOL {
        return Ok(EquilibriumConfig { positions: u, length_unit, residual });
    }
    Err(Error::NoEquilibrium { iterations: NEWTON_MAX_ITER, residual })
}

#[derive(Debug, Clone)]
pub struct NormalModes {
    /// Mode frequencies ω_n (rad/s), ascending.
    pub frequencies: Vec<f64>,
    /// `M[(i, n)]`: component of mode `n` on ion `i` in mass-weighted coordinates.
    pub mode_matrix: DMatrix<f64>,
}

impl NormalModes {
    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn amplitude(&self, ion: usize, mode: usize) -> f64 {
        self.mode_matrix[(ion, mode)]
    }
}

/// Diagonalises the mass-weighted Hessian `ω_z² A_ij m_ref / √(m_i m_j)`.
pub fn compute_modes(chain: &IonChain, eq: &EquilibriumConfig) -> Result<NormalModes> {
    let n = chain.len();
    if eq.positions.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: eq.positions.len() });
    }
    let a = potential_hessian(&eq.positions);
    let masses: Vec<f64> = chain.ions.iter().map(|ion| ion.mass).collect();
    let d = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * chain.reference_mass / (masses[i] * masses[j]).sqrt());

    let eig = SymmetricEigen::new(d);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));

    let mut frequencies = Vec::with_capacity(n);
    let mut mode_matrix = DMatrix::zeros(n, n);
    for (col, &k) in order.iter().enumerate() {
        let lambda = eig.eigenvalues[k];
        if !(lambda > 0.0) {
            return Err(Error::UnstableConfiguration { eigenvalue: lambda });
        }
        frequencies.push(chain.omega_z * lambda.sqrt());

        let mut v = eig.eigenvectors.column(k).into_owned();
        // Sign convention: the largest-magnitude entry is positive. Ties (e.g. the
        // antisymmetric stretch) go to the lowest ion index.
        let mut pivot = 0;
        for i in 1..n {
            if v[i].abs() > v[pivot].abs() + 1e-12 {
                pivot = i;
            }
        }
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        mode_matrix.set_column(col, &v);
    }
    Ok(NormalModes { frequencies, mode_matrix })
}

/// Lamb-Dicke parameter `k·cosθ·√(ħ / 2mω)`.
pub fn lamb_dicke(wavevector: f64, projection: f64, mass: f64, omega: f64) -> f64 {
    wavevector * projection * (HBAR / (2.0 * mass * omega)).sqrt()
}

/// Effective wavevector that produces Lamb-Dicke parameter `eta` for `mass` at `omega`.
pub fn wavevector_for_lamb_dicke(eta: f64, mass: f64, omega: f64) -> f64 {
    eta / (HBAR / (2.0 * mass * omega)).sqrt()
}
