//! Physical constants and boundary unit conversions.
//!
//! Everything inside the crate is SI with angular frequencies in rad/s.
//! Human-facing units (Hz, µm, zN, µV) only appear at the I/O boundary.

use std::f64::consts::TAU;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054_571_817e-34;
/// Unified atomic mass unit, kg.
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Mass of a ⁴⁰Ca⁺ ion taken as 40 u.
pub const CA40_MASS: f64 = 40.0 * ATOMIC_MASS_UNIT;

pub const ZEPTONEWTON: f64 = 1e-21;
pub const MICROMETER: f64 = 1e-6;
pub const MICROVOLT: f64 = 1e-6;

/// Upper bound on the radial radiation-pressure force set by saturation of the cooling transition.
pub const MAX_RADIAL_FORCE: f64 = 30.0 * ZEPTONEWTON;

/// Endcap calibration: 500 µV amplitude produces a 1.2 zN force amplitude.
pub const FORCE_PER_VOLT: f64 = 1.2 * ZEPTONEWTON / (500.0 * MICROVOLT);

#[inline]
pub fn hz_to_rad(f: f64) -> f64 {
    TAU * f
}

#[inline]
pub fn rad_to_hz(w: f64) -> f64 {
    w / TAU
}

/// Converts an endcap voltage amplitude to the axial force amplitude it exerts.
///
/// Linear in the single calibration pair 500 µV ↔ 1.2 zN (2.4 zN peak-to-peak).
pub fn volt_to_force(volts: f64) -> f64 {
    debug_assert!(volts >= 0.0);
    FORCE_PER_VOLT * volts
}
