// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("equilibrium search did not converge after {iterations} iterations (residual force {residual:.3e})")]
    NoEquilibrium { iterations: usize, residual: f64 },

    #[error("unstable crystal: eigenvalue {eigenvalue:.3e} of the mass-weighted Hessian is not positive")]
    UnstableConfiguration { eigenvalue: f64 },

    #[error("mode {mode} is not net-cooled (W = {w:.3e} rad/s)")]
    NetHeating { mode: usize, w: f64 },

    #[error("mode {mode}: resonant configuration, shifted detuning is zero")]
    Resonant { mode: usize },

    #[error("singular configuration for mode {mode}: delta_tilde^2 + W^2 = 0")]
    Singular { mode: usize },

    #[error("unphysical generator: {0}")]
    Unphysical(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("step size underflow at t = {t:.6e} s (h = {h:.3e} s)")]
    StepUnderflow { t: f64, h: f64 },

    #[error("invariant violated at t = {t:.6e} s: {what}")]
    InvariantViolation { t: f64, what: String },
}
