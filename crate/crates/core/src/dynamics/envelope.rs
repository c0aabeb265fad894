use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{
    run_scaled, step_count, AxialSample, IntegratorSettings, Model, Trajectory, TrajectoryMeta,
    ENVELOPE_STEPS_PER_PERIOD,
};
use crate::error::{Error, Result};
use crate::trap::{axial_force, DriveConfig, TrapParams};
use crate::units::MICROMETER;

/// Complex radial envelope α (x = αe^{−iω₀t} + c.c.) and the axial coordinate, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct EnvelopeState {
    pub alpha_re: f64,
    pub alpha_im: f64,
    pub z: f64,
    pub vz: f64,
    pub t: f64,
}

impl EnvelopeState {
    pub fn alpha_abs(&self) -> f64 {
        self.alpha_re.hypot(self.alpha_im)
    }

    pub fn alpha_sq(&self) -> f64 {
        self.alpha_re * self.alpha_re + self.alpha_im * self.alpha_im
    }
}

impl AxialSample for EnvelopeState {
    fn time(&self) -> f64 {
        self.t
    }
    fn axial(&self) -> f64 {
        self.z
    }
    fn radial(&self) -> f64 {
        self.alpha_abs()
    }
    fn radial_column() -> &'static str {
        "alpha_abs"
    }
}

/// Envelope equations in units of 1/Ω and µm:
///
/// ```text
/// α' = i(Δ − ω_x z/ℓ₀)/Ω α + i f₀ e^{iφ}/Ω − (γ/2Ω) α
/// z'' = −z − 2(ω_x/Ω)²|α|²/ℓ₀ + F_z/(mΩ²) − (γ/Ω) z'
/// ```
pub(crate) struct EnvelopeModel {
    omega_z: f64,
    detuning: f64,
    ratio: f64,
    funnel: f64,
    damping: f64,
    drive_re: f64,
    drive_im: f64,
    force_scale: f64,
    drive: DriveConfig,
}

impl EnvelopeModel {
    pub(crate) fn new(p: &TrapParams, d: &DriveConfig, drive_phase: f64) -> Self {
        let f = p.reduced_drive(d.f0_force) / (p.omega_z * MICROMETER);
        Self {
            omega_z: p.omega_z,
            detuning: d.detuning(p) / p.omega_z,
            ratio: p.omega_x / p.omega_z,
            funnel: p.funnel_length / MICROMETER,
            damping: p.damping / p.omega_z,
            // i f e^{iφ}
            drive_re: -f * drive_phase.sin(),
            drive_im: f * drive_phase.cos(),
            force_scale: p.axial_compliance() / MICROMETER,
            drive: *d,
        }
    }

    pub(crate) fn rhs(&self, tau: f64, y: &[f64; 4]) -> [f64; 4] {
        let [re, im, z, vz] = *y;
        let kappa = self.detuning - self.ratio * z / self.funnel;
        let half = 0.5 * self.damping;
        let fz = self.force_scale * axial_force(&self.drive, tau / self.omega_z);
        [
            -kappa * im + self.drive_re - half * re,
            kappa * re + self.drive_im - half * im,
            vz,
            -z - 2.0 * self.ratio * self.ratio * (re * re + im * im) / self.funnel + fz
                - self.damping * vz,
        ]
    }

    pub(crate) fn to_scaled(&self, s: &EnvelopeState) -> [f64; 4] {
        [
            s.alpha_re / MICROMETER,
            s.alpha_im / MICROMETER,
            s.z / MICROMETER,
            s.vz / (MICROMETER * self.omega_z),
        ]
    }

    pub(crate) fn from_scaled(&self, y: &[f64; 4], tau: f64) -> EnvelopeState {
        EnvelopeState {
            alpha_re: y[0] * MICROMETER,
            alpha_im: y[1] * MICROMETER,
            z: y[2] * MICROMETER,
            vz: y[3] * MICROMETER * self.omega_z,
            t: tau / self.omega_z,
        }
    }
}

pub(crate) fn check_envelope(p: &TrapParams, d: &DriveConfig, t_end: f64, dt: f64) -> Result<usize> {
    p.validate()?;
    d.validate()?;
    let n = step_count(t_end, dt)?;
    let max_dt = TAU / (ENVELOPE_STEPS_PER_PERIOD * p.omega_z);
    if dt > max_dt * (1.0 + 1e-12) {
        return Err(Error::Parameter {
            name: "dt",
            reason: format!("envelope model needs dt ≤ 2π/(50Ω) = {max_dt:e} s, got {dt:e}"),
        });
    }
    Ok(n)
}

/// Runs the envelope model, calling `observe` on every step with the SI state.
pub(crate) fn run_envelope(
    s0: EnvelopeState,
    p: &TrapParams,
    d: &DriveConfig,
    t_end: f64,
    settings: IntegratorSettings,
    mut observe: impl FnMut(usize, EnvelopeState),
) -> Result<EnvelopeState> {
    let n = check_envelope(p, d, t_end, settings.dt)?;
    let model = EnvelopeModel::new(p, d, settings.drive_phase);
    let h = settings.dt * p.omega_z;
    let last = run_scaled(
        |tau, y| model.rhs(tau, y),
        model.to_scaled(&s0),
        s0.t * p.omega_z,
        h,
        n,
        1.0 / p.omega_z,
        |k, tau, y| observe(k, model.from_scaled(y, tau)),
    )?;
    Ok(model.from_scaled(&last, s0.t * p.omega_z + n as f64 * h))
}

/// Integrates the coupled envelope and axial equations.
pub fn integrate_envelope(
    s0: EnvelopeState,
    p: &TrapParams,
    d: &DriveConfig,
    t_end: f64,
    settings: IntegratorSettings,
) -> Result<Trajectory<EnvelopeState>> {
    let stride = settings.stride.max(1);
    let mut states = Vec::new();
    run_envelope(s0, p, d, t_end, settings, |k, s| {
        if k % stride == 0 {
            states.push(s);
        }
    })?;
    Ok(Trajectory {
        states,
        meta: TrajectoryMeta { model: Model::Envelope, trap: *p, drive: *d, settings, seed: None },
    })
}

/// Means over the second half of a dwell at fixed drive settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DwellAverage {
    pub end: EnvelopeState,
    pub mean_alpha_sq: f64,
    pub mean_z: f64,
}

/// Integrates for `dwell` seconds and averages |α|² and z over the second half.
pub fn dwell_average(
    s0: EnvelopeState,
    p: &TrapParams,
    d: &DriveConfig,
    dwell: f64,
    dt: f64,
) -> Result<DwellAverage> {
    let n = step_count(dwell, dt)?;
    let (mut sum_a, mut sum_z, mut count) = (0.0, 0.0, 0usize);
    let end = run_envelope(s0, p, d, dwell, IntegratorSettings::new(dt), |k, s| {
        if 2 * k > n {
            sum_a += s.alpha_sq();
            sum_z += s.z;
            count += 1;
        }
    })?;
    let c = count.max(1) as f64;
    Ok(DwellAverage { end, mean_alpha_sq: sum_a / c, mean_z: sum_z / c })
}
