//! Trap and drive parameters and the closed-form quantities derived from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{hz_to_rad, CA40_MASS, HBAR, MAX_RADIAL_FORCE};

/// Physical constants of the funnel trap and the trapped particle.
///
/// Angular frequencies are in rad/s, lengths in metres, mass in kilograms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrapParams {
    pub mass: f64,
    /// Radial secular frequency along x at z = 0.
    pub omega_x: f64,
    /// Radial secular frequency along y at z = 0.
    pub omega_y: f64,
    /// Axial secular frequency Ω.
    pub omega_z: f64,
    /// Funnel length ℓ₀ over which the radial frequency changes by 100 %.
    pub funnel_length: f64,
    /// Damping rate γ shared by the radial and axial modes.
    pub damping: f64,
}

impl Default for TrapParams {
    /// The ⁴⁰Ca⁺ funnel trap: ω_{x,y} = 2π·{1.14, 1.15} MHz, Ω = 2π·100 kHz,
    /// ℓ₀ = 1.81 mm, γ = 2π·250 Hz.
    fn default() -> Self {
        Self {
            mass: CA40_MASS,
            omega_x: hz_to_rad(1.14e6),
            omega_y: hz_to_rad(1.15e6),
            omega_z: hz_to_rad(100e3),
            funnel_length: 1.81e-3,
            damping: hz_to_rad(250.0),
        }
    }
}

impl TrapParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mass", self.mass),
            ("omega_x", self.omega_x),
            ("omega_y", self.omega_y),
            ("omega_z", self.omega_z),
            ("funnel_length", self.funnel_length),
            ("damping", self.damping),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if self.omega_z >= self.omega_x {
            return Err(Error::param(
                "omega_z",
                "axial frequency must be below the radial frequency",
            ));
        }
        if self.damping >= self.omega_z {
            return Err(Error::param("damping", "axial mode must be underdamped (γ < Ω)"));
        }
        Ok(())
    }

    /// Duffing coefficient ξ = 2ω_x³/(Ω²ℓ₀²), rad/s per m².
    pub fn xi(&self) -> f64 {
        2.0 * self.omega_x.powi(3) / (self.omega_z.powi(2) * self.funnel_length.powi(2))
    }

    /// Reduced radial drive f₀ = F₀/(4mω_x), m/s.
    pub fn reduced_drive(&self, f0_force: f64) -> f64 {
        f0_force / (4.0 * self.mass * self.omega_x)
    }

    /// Inverse of [`TrapParams::reduced_drive`].
    pub fn radial_force(&self, f0_reduced: f64) -> f64 {
        f0_reduced * 4.0 * self.mass * self.omega_x
    }

    /// Static axial displacement per unit axial force, 1/(mΩ²).
    pub fn axial_compliance(&self) -> f64 {
        1.0 / (self.mass * self.omega_z.powi(2))
    }

    /// Radial detuning shift per unit axial force, ω_x/(mℓ₀Ω²).
    pub fn detuning_per_force(&self) -> f64 {
        self.omega_x / (self.mass * self.funnel_length * self.omega_z.powi(2))
    }

    /// Axial pull per squared radial envelope, 2ω_x²/(Ω²ℓ₀).
    pub fn radial_pull(&self) -> f64 {
        2.0 * self.omega_x.powi(2) / (self.omega_z.powi(2) * self.funnel_length)
    }

    /// Axial zero-point length √(ħ/2mΩ).
    pub fn axial_zero_point(&self) -> f64 {
        (HBAR / (2.0 * self.mass * self.omega_z)).sqrt()
    }
}

/// The three force channels: radial drive F_x, axial signal F_s, axial enhancement F_e.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveConfig {
    /// Radial drive magnitude F₀, N.
    pub f0_force: f64,
    /// Radial drive frequency ω₀, rad/s.
    pub omega_0: f64,
    /// Signal force amplitude F_s, N.
    pub fs_force: f64,
    pub omega_s: f64,
    /// Enhancement force amplitude F_e, N.
    pub fe_force: f64,
    pub omega_e: f64,
}

impl DriveConfig {
    /// A drive with the given radial force and detuning and no axial forces.
    pub fn radial(p: &TrapParams, f0_force: f64, detuning: f64) -> Self {
        Self {
            f0_force,
            omega_0: p.omega_x + detuning,
            fs_force: 0.0,
            omega_s: 0.0,
            fe_force: 0.0,
            omega_e: 0.0,
        }
    }

    /// Detuning Δ = ω₀ − ω_x.
    pub fn detuning(&self, p: &TrapParams) -> f64 {
        self.omega_0 - p.omega_x
    }

    pub fn with_detuning(mut self, p: &TrapParams, detuning: f64) -> Self {
        self.omega_0 = p.omega_x + detuning;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("f0_force", self.f0_force),
            ("fs_force", self.fs_force),
            ("fe_force", self.fe_force),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("amplitude must be ≥ 0, got {v}")));
            }
        }
        for (name, v) in [
            ("omega_0", self.omega_0),
            ("omega_s", self.omega_s),
            ("omega_e", self.omega_e),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(name, format!("frequency must be ≥ 0, got {v}")));
            }
        }
        if self.f0_force > MAX_RADIAL_FORCE * (1.0 + 1e-12) {
            return Err(Error::param(
                "f0_force",
                format!(
                    "radial force {:.3} zN exceeds the 30 zN saturation bound",
                    self.f0_force / 1e-21
                ),
            ));
        }
        let all_on = self.f0_force > 0.0 && self.fs_force > 0.0 && self.fe_force > 0.0;
        if all_on && !(self.omega_s < self.omega_e && self.omega_e < self.omega_0) {
            return Err(Error::param(
                "omega_e",
                "with all channels active the frequencies must satisfy ω_s < ω_e < ω₀",
            ));
        }
        Ok(())
    }
}

/// Closed-form quantities derived from [`TrapParams`] and [`DriveConfig`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedParams {
    /// ξ, rad/s per m².
    pub xi: f64,
    /// f₀, m/s.
    pub f0_reduced: f64,
    /// Axial zero-point length, m. Reference scale only.
    pub zpf_axial: f64,
}

pub fn derive_params(p: &TrapParams, d: &DriveConfig) -> Result<DerivedParams> {
    p.validate()?;
    d.validate()?;
    Ok(DerivedParams {
        xi: p.xi(),
        f0_reduced: p.reduced_drive(d.f0_force),
        zpf_axial: p.axial_zero_point(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Largest |z/ℓ₀| for which the linearised funnel is trusted without a warning.
pub const FUNNEL_VALIDITY: f64 = 0.5;

/// Radial frequency at axial position z, ω_axis·(1 + z/ℓ₀).
pub fn local_radial_frequency(p: &TrapParams, z: f64, axis: Axis) -> f64 {
    let ratio = z / p.funnel_length;
    if ratio.abs() >= FUNNEL_VALIDITY {
        log::warn!("|z/ℓ₀| = {:.3} is outside the linear funnel regime", ratio.abs());
    }
    let w = match axis {
        Axis::X => p.omega_x,
        Axis::Y => p.omega_y,
    };
    w * (1.0 + ratio)
}

/// Instantaneous axial force F_e cos(ω_e t) + F_s cos(ω_s t).
pub fn axial_force(d: &DriveConfig, t: f64) -> f64 {
    d.fe_force * (d.omega_e * t).cos() + d.fs_force * (d.omega_s * t).cos()
}

/// Instantaneous radial force F₀ cos(ω₀ t).
pub fn radial_force(d: &DriveConfig, t: f64) -> f64 {
    d.f0_force * (d.omega_0 * t).cos()
}

/// Detuning modulation δ(t) = ω_x F_z(t)/(mℓ₀Ω²).
pub fn detuning_modulation(p: &TrapParams, d: &DriveConfig, t: f64) -> f64 {
    p.detuning_per_force() * axial_force(d, t)
}

/// Axial equilibrium z₀ = −2(ω_x²/Ω²)|α|²/ℓ₀ + F_z/(mΩ²).
pub fn equilibrium_displacement(p: &TrapParams, alpha_sq: f64, fz: f64) -> f64 {
    debug_assert!(alpha_sq >= 0.0);
    -p.radial_pull() * alpha_sq + fz * p.axial_compliance()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::{rad_to_hz, ZEPTONEWTON};
    use std::f64::consts::TAU;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn xi_matches_quoted_value() {
        let p = TrapParams::default();
        let d = derive_params(&p, &DriveConfig::radial(&p, 0.0, 0.0)).unwrap();
        assert!(rel(rad_to_hz(d.xi), 9.04e13) < 5e-3, "{}", rad_to_hz(d.xi));
        assert_eq!(d.xi, p.xi());
    }

    #[test]
    fn zero_point_length() {
        let p = TrapParams { mass: 6.642e-26, ..TrapParams::default() };
        let z = p.axial_zero_point();
        assert!((z - 36e-9).abs() < 1e-9, "{z}");
    }

    #[test]
    fn xi_vanishes_for_straight_trap() {
        let p = TrapParams { funnel_length: 1e12, ..TrapParams::default() };
        assert!(p.xi() < 1e-6);
    }

    #[test]
    fn xi_scales_inverse_square_in_funnel_length() {
        let p = TrapParams::default();
        let q = TrapParams { funnel_length: 3.0 * p.funnel_length, ..p };
        assert!(rel(q.xi() * 9.0, p.xi()) < 1e-14);
    }

    #[test]
    fn reduced_drive_at_saturation() {
        let p = TrapParams { mass: 6.642e-26, ..TrapParams::default() };
        // 30e-21 / (4 * 6.642e-26 * 2π * 1.14e6)
        let expected = 30e-21 / (4.0 * 6.642e-26 * TAU * 1.14e6);
        assert!(rel(p.reduced_drive(30.0 * ZEPTONEWTON), expected) < 1e-14);
        assert!(rel(expected, 1.58e-2) < 5e-3);
    }

    #[test]
    fn local_frequency() {
        let p = TrapParams::default();
        assert_eq!(local_radial_frequency(&p, 0.0, Axis::X), p.omega_x);
        let w = local_radial_frequency(&p, -p.funnel_length / 100.0, Axis::X);
        assert!(rel(w, 0.99 * p.omega_x) < 1e-14);
        let shift = local_radial_frequency(&p, -14.4e-6, Axis::X) - p.omega_x;
        assert!(rel(rad_to_hz(shift), -9.07e3) < 2e-3, "{}", rad_to_hz(shift));
        let wy = local_radial_frequency(&p, 0.0, Axis::Y);
        assert_eq!(wy, p.omega_y);
    }

    #[test]
    fn axial_force_channels() {
        let p = TrapParams::default();
        let mut d = DriveConfig::radial(&p, 0.0, 0.0);
        assert_eq!(axial_force(&d, 0.3), 0.0);
        d.fs_force = 1.2e-21;
        d.omega_s = TAU * 0.5;
        assert_eq!(axial_force(&d, 0.0), 1.2e-21);
        assert!((axial_force(&d, 1.0) + 1.2e-21).abs() < 1e-35);
    }

    #[test]
    fn detuning_modulation_values() {
        let p = TrapParams { mass: 6.642e-26, ..TrapParams::default() };
        let mut d = DriveConfig::radial(&p, 0.0, 0.0);
        assert_eq!(detuning_modulation(&p, &d, 0.0), 0.0);
        d.fs_force = 1.2e-21;
        let delta = detuning_modulation(&p, &d, 0.0);
        // ω_x F/(mℓ₀Ω²) evaluated by hand: 181.1 rad/s
        let by_hand = TAU * 1.14e6 * 1.2e-21 / (6.642e-26 * 1.81e-3 * (TAU * 1e5).powi(2));
        assert!(rel(delta, by_hand) < 1e-13);
        assert!(rel(delta, 181.1) < 2e-3, "{delta}");
        assert!(rel(rad_to_hz(delta), 28.8) < 3e-3);
        d.fs_force *= 2.0;
        assert!(rel(detuning_modulation(&p, &d, 0.0), 2.0 * delta) < 1e-14);
    }

    #[test]
    fn equilibrium_values() {
        let p = TrapParams::default();
        assert_eq!(equilibrium_displacement(&p, 0.0, 0.0), 0.0);
        let z = equilibrium_displacement(&p, 0.0, 1.2e-21);
        assert!(rel(z, 45.8e-9) < 2e-3, "{z}");
        let z = equilibrium_displacement(&p, (10e-6f64).powi(2), 0.0);
        assert!(rel(z, -14.4e-6) < 3e-3, "{z}");
    }

    #[test]
    fn invariants_rejected() {
        let p = TrapParams::default();
        assert!(TrapParams { mass: 0.0, ..p }.validate().is_err());
        assert!(TrapParams { omega_z: 2.0 * p.omega_x, ..p }.validate().is_err());
        assert!(TrapParams { damping: 2.0 * p.omega_z, ..p }.validate().is_err());
        let mut d = DriveConfig::radial(&p, 31.0 * ZEPTONEWTON, 0.0);
        assert!(matches!(d.validate(), Err(Error::Parameter { name: "f0_force", .. })));
        d.f0_force = 10.0 * ZEPTONEWTON;
        d.fs_force = 1e-21;
        d.fe_force = 1e-20;
        d.omega_s = 100.0;
        d.omega_e = 10.0;
        assert!(d.validate().is_err());
    }
}
