// Copyright 2026 ionsim Contributors
// SPDX-License-Identifier: Apache-2.0

//! Physical constants (CODATA 2018) and unit helpers.

use std::f64::consts::PI;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
pub const AMU: f64 = 1.660_539_066_60e-27;

pub const MASS_MG24_AMU: f64 = 23.985_041_697;
pub const MASS_MG25_AMU: f64 = 24.985_836_976;

/// `x` in units of 2π·MHz, as angular frequency.
pub fn mhz(x: f64) -> f64 {
    2.0 * PI * 1e6 * x
}

/// Angular frequency expressed in units of 2π·MHz.
pub fn to_mhz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e6)
}

pub fn khz(x: f64) -> f64 {
    2.0 * PI * 1e3 * x
}

pub fn to_khz(omega: f64) -> f64 {
    omega / (2.0 * PI * 1e3)
}

/// Phonons per millisecond to phonons per second.
pub fn per_ms(x: f64) -> f64 {
    x * 1e3
}
