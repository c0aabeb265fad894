use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::envelope::run_envelope;
use super::full::{check_full, FullModel};
use super::{run_scaled, EnvelopeState, IntegratorSettings, ENVELOPE_STEPS_PER_PERIOD};
use crate::error::{Error, Result};
use crate::trap::{DriveConfig, TrapParams};
use crate::units::MICROMETER;

/// Full-model steps per drive period used for demodulation.
const FULL_STEPS_PER_DRIVE_PERIOD: usize = 256;

/// Deviation between the envelope model and the demodulated full model.
///
/// Both deviations are maxima over the window, normalised by the peak magnitude of the
/// envelope-model trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccuracyReport {
    pub max_rel_dev_alpha: f64,
    pub max_rel_dev_z: f64,
    /// Number of drive periods compared.
    pub samples: usize,
}

/// Runs both models from rest and compares |α| and z over `window` seconds.
///
/// The full-model x(t) is quadrature-demodulated at ω₀ and averaged over each drive
/// period; the envelope model is sampled at the period midpoints.
pub fn envelope_accuracy_check(p: &TrapParams, d: &DriveConfig, window: f64) -> Result<AccuracyReport> {
    let delta = d.detuning(p);
    if delta.abs() > 0.1 * p.omega_z {
        return Err(Error::Precondition(format!(
            "rotating-wave comparison needs |Δ| ≪ Ω, got |Δ|/Ω = {:.3}",
            delta.abs() / p.omega_z
        )));
    }
    let period = TAU / d.omega_0;
    let blocks = (window / period).floor() as usize;
    if blocks == 0 {
        return Err(Error::Precondition("window shorter than one drive period".into()));
    }

    // full model, block averages over each drive period
    let dt_full = period / FULL_STEPS_PER_DRIVE_PERIOD as f64;
    let n_full = blocks * FULL_STEPS_PER_DRIVE_PERIOD;
    check_full(p, d, n_full as f64 * dt_full, dt_full)?;
    let model = FullModel::new(p, d, 0.0);
    let mut full_alpha = vec![(0.0f64, 0.0f64); blocks];
    let mut full_z = vec![0.0f64; blocks];
    let scale = 1.0 / FULL_STEPS_PER_DRIVE_PERIOD as f64;
    run_scaled(
        |tau, y| model.rhs(tau, y),
        [0.0; 4],
        0.0,
        dt_full * p.omega_z,
        n_full - 1,
        1.0 / p.omega_z,
        |k, tau, y| {
            let b = k / FULL_STEPS_PER_DRIVE_PERIOD;
            let phase = d.omega_0 * tau / p.omega_z;
            // x e^{iω₀t} = α + α* e^{2iω₀t}
            full_alpha[b].0 += y[0] * phase.cos() * scale;
            full_alpha[b].1 += y[0] * phase.sin() * scale;
            full_z[b] += y[2] * scale;
        },
    )?;

    // envelope model, sampled at block midpoints
    let max_dt = TAU / (ENVELOPE_STEPS_PER_PERIOD * p.omega_z);
    let sub = ((period / 2.0) / max_dt).ceil().max(1.0) as usize;
    let dt_env = period / (2 * sub) as f64;
    let mut env_alpha = vec![0.0f64; blocks];
    let mut env_z = vec![0.0f64; blocks];
    run_envelope(
        EnvelopeState::default(),
        p,
        d,
        (2 * sub * blocks) as f64 * dt_env,
        IntegratorSettings::new(dt_env),
        |k, s| {
            if k % sub == 0 && (k / sub) % 2 == 1 {
                let b = k / (2 * sub);
                if b < blocks {
                    env_alpha[b] = s.alpha_abs() / MICROMETER;
                    env_z[b] = s.z / MICROMETER;
                }
            }
        },
    )?;

    let full_abs: Vec<f64> = full_alpha.iter().map(|(re, im)| re.hypot(*im)).collect();
    Ok(AccuracyReport {
        max_rel_dev_alpha: max_rel_dev(&full_abs, &env_alpha),
        max_rel_dev_z: max_rel_dev(&full_z, &env_z),
        samples: blocks,
    })
}

fn max_rel_dev(a: &[f64], reference: &[f64]) -> f64 {
    let peak = reference.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return 0.0;
    }
    a.iter().zip(reference).map(|(x, r)| (x - r).abs()).fold(0.0, f64::max) / peak
}
