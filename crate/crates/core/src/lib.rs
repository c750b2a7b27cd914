// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Open-system simulation of sympathetically cooled ion crystals.
//!
//! The crate is organised bottom-up:
//!
//! * [`crystal`] : equilibrium positions and axial normal modes of a mixed-species chain.
//! * [`cooling`] : Doppler-cooling rates, steady-state occupations and control ratios per mode.
//! * [`fullmodel`] : the rotating-frame spin-phonon Liouvillian on a truncated Fock space.
//! * [`effective`] : spin-only generators obtained by eliminating the damped phonons.
//! * [`dynamics`] : adaptive integration, steady states, noise trajectories and observables.
//!
//! All frequencies and rates are angular (rad/s) and all times are in seconds.

// `!(x > 0.0)` rejects NaN along with the out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cooling;
pub mod crystal;
pub mod dynamics;
pub mod effective;
mod error;
pub mod fullmodel;
pub mod lindblad;
pub mod ops;
pub mod state;
pub mod units;

pub use error::{Error, Result};
pub use lindblad::Lindbladian;
pub use state::{Basis, DensityMatrix};

pub use num_complex::Complex64 as C64;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
