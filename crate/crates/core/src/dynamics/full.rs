use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{
    run_scaled, step_count, AxialSample, IntegratorSettings, Model, Trajectory, TrajectoryMeta,
    FULL_MODEL_MAX_DURATION, FULL_MODEL_STEPS_PER_PERIOD,
};
use crate::error::{Error, Result};
use crate::trap::{axial_force, DriveConfig, TrapParams};
use crate::units::MICROMETER;

/// Phase-space point of the exact two-mode model (SI units).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FullState {
    pub x: f64,
    pub px: f64,
    pub z: f64,
    pub pz: f64,
    pub t: f64,
}

impl AxialSample for FullState {
    fn time(&self) -> f64 {
        self.t
    }
    fn axial(&self) -> f64 {
        self.z
    }
    fn radial(&self) -> f64 {
        self.x
    }
    fn radial_column() -> &'static str {
        "x"
    }
}

/// Exact equations of motion in units of 1/Ω and µm:
///
/// ```text
/// x'' = −(ω_x/Ω)²(1 + 2z/ℓ₀) x + F_x/(mΩ²) − (γ/Ω) x'
/// z'' = −z − (ω_x/Ω)² x²/ℓ₀ + F_z/(mΩ²) − (γ/Ω) z'
/// ```
pub(crate) struct FullModel {
    omega_z: f64,
    mass: f64,
    ratio_sq: f64,
    funnel: f64,
    damping: f64,
    force_scale: f64,
    drive_ratio: f64,
    drive_phase: f64,
    drive: DriveConfig,
}

impl FullModel {
    pub(crate) fn new(p: &TrapParams, d: &DriveConfig, drive_phase: f64) -> Self {
        Self {
            omega_z: p.omega_z,
            mass: p.mass,
            ratio_sq: (p.omega_x / p.omega_z).powi(2),
            funnel: p.funnel_length / MICROMETER,
            damping: p.damping / p.omega_z,
            force_scale: p.axial_compliance() / MICROMETER,
            drive_ratio: d.omega_0 / p.omega_z,
            drive_phase,
            drive: *d,
        }
    }

    pub(crate) fn rhs(&self, tau: f64, y: &[f64; 4]) -> [f64; 4] {
        let [x, vx, z, vz] = *y;
        let fx = self.force_scale * self.drive.f0_force * (self.drive_ratio * tau - self.drive_phase).cos();
        let fz = self.force_scale * axial_force(&self.drive, tau / self.omega_z);
        [
            vx,
            -self.ratio_sq * (1.0 + 2.0 * z / self.funnel) * x + fx - self.damping * vx,
            vz,
            -z - self.ratio_sq * x * x / self.funnel + fz - self.damping * vz,
        ]
    }

    pub(crate) fn to_scaled(&self, s: &FullState) -> [f64; 4] {
        let v = self.omega_z * MICROMETER * self.mass;
        [s.x / MICROMETER, s.px / v, s.z / MICROMETER, s.pz / v]
    }

    pub(crate) fn from_scaled(&self, y: &[f64; 4], tau: f64) -> FullState {
        let v = self.omega_z * MICROMETER * self.mass;
        FullState {
            x: y[0] * MICROMETER,
            px: y[1] * v,
            z: y[2] * MICROMETER,
            pz: y[3] * v,
            t: tau / self.omega_z,
        }
    }

    pub(crate) fn omega_z(&self) -> f64 {
        self.omega_z
    }
}

pub(crate) fn check_full(p: &TrapParams, d: &DriveConfig, t_end: f64, dt: f64) -> Result<usize> {
    p.validate()?;
    d.validate()?;
    let n = step_count(t_end, dt)?;
    let max_dt = TAU / (FULL_MODEL_STEPS_PER_PERIOD * p.omega_x);
    if dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::Parameter {
            name: "dt",
            reason: format!("full model needs dt ≤ 2π/(200ω_x) = {max_dt:e} s, got {dt:e}"),
        });
    }
    if t_end > FULL_MODEL_MAX_DURATION {
        return Err(Error::Parameter {
            name: "t_end",
            reason: format!("full model runs are limited to 50 ms, got {t_end} s"),
        });
    }
    Ok(n)
}

/// Integrates mẍ = −mω_x²(1 + 2z/ℓ₀)x + F_x − mγẋ and mz̈ = −mΩ²z − mω_x²x²/ℓ₀ + F_z − mγż.
pub fn integrate_full(
    s0: FullState,
    p: &TrapParams,
    d: &DriveConfig,
    t_end: f64,
    settings: IntegratorSettings,
) -> Result<Trajectory<FullState>> {
    let n = check_full(p, d, t_end, settings.dt)?;
    let model = FullModel::new(p, d, settings.drive_phase);
    let h = settings.dt * p.omega_z;
    let stride = settings.stride.max(1);
    let mut states = Vec::with_capacity(n / stride + 2);
    run_scaled(
        |tau, y| model.rhs(tau, y),
        model.to_scaled(&s0),
        s0.t * model.omega_z(),
        h,
        n,
        1.0 / p.omega_z,
        |k, tau, y| {
            if k % stride == 0 {
                states.push(model.from_scaled(y, tau));
            }
        },
    )?;
    Ok(Trajectory {
        states,
        meta: TrajectoryMeta { model: Model::Full, trap: *p, drive: *d, settings, seed: None },
    })
}

/// Energy of the two-mode Hamiltonian including the drive potential at time `s.t`.
pub fn full_hamiltonian(s: &FullState, p: &TrapParams, d: &DriveConfig) -> f64 {
    let fx = d.f0_force * (d.omega_0 * s.t).cos();
    let fz = axial_force(d, s.t);
    (s.px * s.px + s.pz * s.pz) / (2.0 * p.mass)
        + 0.5 * p.mass * p.omega_z.powi(2) * s.z * s.z
        + 0.5 * p.mass * p.omega_x.powi(2) * (1.0 + 2.0 * s.z / p.funnel_length) * s.x * s.x
        - fx * s.x
        - fz * s.z
}
