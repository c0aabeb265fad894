//! Time-domain integration of the two-mode equations of motion and of the
//! reduced envelope system.
//!
//! Both integrators are fixed-step classical Runge–Kutta schemes operating in scaled
//! units: time in 1/Ω and lengths in µm. States cross the module boundary in SI.

mod accuracy;
mod envelope;
mod full;

pub use accuracy::{envelope_accuracy_check, AccuracyReport};
pub use envelope::{dwell_average, integrate_envelope, DwellAverage, EnvelopeState};
pub use full::{full_hamiltonian, integrate_full, FullState};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Cell, CsvTable};
use crate::trap::{DriveConfig, TrapParams};
use crate::units::MICROMETER;

/// Longest full-model run accepted, s.
pub const FULL_MODEL_MAX_DURATION: f64 = 50e-3;
/// Minimum number of full-model steps per radial period.
pub const FULL_MODEL_STEPS_PER_PERIOD: f64 = 200.0;
/// Minimum number of envelope-model steps per axial period.
pub const ENVELOPE_STEPS_PER_PERIOD: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    /// Step size, s.
    pub dt: f64,
    /// Keep every `stride`-th step in the returned trajectory.
    pub stride: usize,
    /// Phase φ of the radial drive, F_x = F₀ cos(ω₀t − φ).
    pub drive_phase: f64,
}

impl IntegratorSettings {
    pub fn new(dt: f64) -> Self {
        Self { dt, stride: 1, drive_phase: 0.0 }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    pub fn with_drive_phase(mut self, phase: f64) -> Self {
        self.drive_phase = phase;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Model {
    Full,
    Envelope,
    QuasiStatic,
}

impl Model {
    pub fn as_str(&self) -> &'static str {
        match self {
            Model::Full => "full",
            Model::Envelope => "envelope",
            Model::QuasiStatic => "quasi-static",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub model: Model,
    pub trap: TrapParams,
    pub drive: DriveConfig,
    pub settings: IntegratorSettings,
    pub seed: Option<u64>,
}

/// A state carrying a time stamp and an axial position.
pub trait AxialSample {
    fn time(&self) -> f64;
    /// Axial position, m.
    fn axial(&self) -> f64;
    /// The radial observable written to CSV, m.
    fn radial(&self) -> f64;
    fn radial_column() -> &'static str;
}

/// Uniformly sampled states of one run. Immutable once returned.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<S> {
    pub states: Vec<S>,
    pub meta: TrajectoryMeta,
}

impl<S: AxialSample> Trajectory<S> {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.states.iter().map(AxialSample::time)
    }

    pub fn sample_interval(&self) -> f64 {
        self.meta.settings.dt * self.meta.settings.stride as f64
    }

    pub fn last(&self) -> &S {
        self.states.last().expect("trajectory always holds the initial state")
    }

    pub fn to_csv(&self) -> CsvTable {
        let radial = format!("{}_um", S::radial_column());
        let mut t = CsvTable::new(&["t_s", radial.as_str(), "z_um"]);
        let m = &self.meta;
        t.meta("model", m.model.as_str())
            .meta("dt_s", m.settings.dt)
            .meta("stride", m.settings.stride)
            .meta("seed", m.seed.map_or("none".to_string(), |s| s.to_string()))
            .meta("mass_kg", m.trap.mass)
            .meta("omega_x_rad_s", m.trap.omega_x)
            .meta("omega_z_rad_s", m.trap.omega_z)
            .meta("funnel_length_m", m.trap.funnel_length)
            .meta("gamma_rad_s", m.trap.damping)
            .meta("f0_n", m.drive.f0_force)
            .meta("omega_0_rad_s", m.drive.omega_0)
            .meta("fs_n", m.drive.fs_force)
            .meta("omega_s_rad_s", m.drive.omega_s)
            .meta("fe_n", m.drive.fe_force)
            .meta("omega_e_rad_s", m.drive.omega_e);
        for s in &self.states {
            t.row(&[
                Cell::Num(s.time()),
                Cell::Num(s.radial() / MICROMETER),
                Cell::Num(s.axial() / MICROMETER),
            ]);
        }
        t
    }
}

pub(crate) fn rk4_step<const N: usize>(
    f: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    h: f64,
) -> [f64; N] {
    let add = |a: &[f64; N], k: &[f64; N], s: f64| -> [f64; N] {
        let mut out = *a;
        for i in 0..N {
            out[i] += s * k[i];
        }
        out
    };
    let k1 = f(t, y);
    let k2 = f(t + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = f(t + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Number of steps covering `t_end` with step `dt`.
pub(crate) fn step_count(t_end: f64, dt: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::Parameter { name: "dt", reason: format!("must be > 0, got {dt}") });
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::Parameter { name: "t_end", reason: format!("must be ≥ 0, got {t_end}") });
    }
    Ok((t_end / dt).round() as usize)
}

/// Runs `n` fixed RK4 steps in scaled time, calling `observe(k, τ_k, y_k)` for k = 0..=n.
pub(crate) fn run_scaled<const N: usize>(
    rhs: impl Fn(f64, &[f64; N]) -> [f64; N],
    y0: [f64; N],
    tau0: f64,
    h: f64,
    n: usize,
    time_scale: f64,
    mut observe: impl FnMut(usize, f64, &[f64; N]),
) -> Result<[f64; N]> {
    let mut y = y0;
    observe(0, tau0, &y);
    for k in 0..n {
        let tau = tau0 + k as f64 * h;
        let next = rk4_step(&rhs, tau, &y, h);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { last_valid_t: tau * time_scale });
        }
        y = next;
        observe(k + 1, tau0 + (k + 1) as f64 * h, &y);
    }
    Ok(y)
}
