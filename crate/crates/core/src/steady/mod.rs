//! Steady states of the driven Duffing envelope.
//!
//! The quasi-stationary squared amplitude u = |α₀|² solves
//!
//! ```text
//! ξ²u³ + 2ξΔ_eff u² + (Δ_eff² + γ²/4) u − f₀² = 0
//! ```
//!
//! with Δ_eff = Δ − δ(t). Internally the cubic is solved in the scaled variable
//! v = ξu/(γ/2), detuning D = Δ_eff/(γ/2) and drive F = ξf₀²/(γ/2)³, where it reads
//! v³ + 2Dv² + (D² + 1)v − F = 0 and every coefficient is of order one or a modest power of D.

mod bistable;
pub mod cubic;
mod tracker;

pub use bistable::{bistable_region, BistableRegion};
pub use tracker::{
    hysteresis_sweep, track_branch, BranchTracker, Jump, SweepPoint, SweepRecord,
};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Roots closer than this (relative in u) are reported as one degenerate root.
pub const ROOT_MERGE_TOLERANCE: f64 = 1e-6;

/// Relative residual (to f₀²) accepted by [`classify_stability`] for a candidate root.
pub const ROOT_ACCEPT_TOLERANCE: f64 = 1e-6;

/// Critical scaled drive ξf₀²/(γ/2)³ above which the response is bistable.
pub const CRITICAL_SCALED_DRIVE: f64 = 8.0 * 1.732_050_807_568_877_2 / 9.0;

/// Parameters of the reduced Duffing envelope equation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingParams {
    /// Reduced drive f₀, m/s.
    pub f0: f64,
    /// Damping rate γ, rad/s.
    pub gamma: f64,
    /// Nonlinearity ξ, rad/s per m².
    pub xi: f64,
}

impl DuffingParams {
    pub fn new(f0: f64, gamma: f64, xi: f64) -> Result<Self> {
        let p = Self { f0, gamma, xi };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma.is_finite() && self.gamma > 0.0) {
            return Err(Error::Domain(format!("damping must be > 0, got {}", self.gamma)));
        }
        if !(self.xi.is_finite() && self.xi >= 0.0) {
            return Err(Error::Domain(format!("nonlinearity must be ≥ 0, got {}", self.xi)));
        }
        if !(self.f0.is_finite() && self.f0 >= 0.0) {
            return Err(Error::Domain(format!("drive must be ≥ 0, got {}", self.f0)));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn half_gamma(&self) -> f64 {
        0.5 * self.gamma
    }

    /// ξf₀²/(γ/2)³.
    pub fn scaled_drive(&self) -> f64 {
        self.xi * self.f0 * self.f0 / self.half_gamma().powi(3)
    }

    /// True when some detuning admits two stable amplitudes.
    pub fn is_bistable(&self) -> bool {
        self.scaled_drive() > CRITICAL_SCALED_DRIVE
    }

    /// Cubic residual u[(Δ + ξu)² + γ²/4] − f₀².
    pub fn residual(&self, u: f64, delta_eff: f64) -> f64 {
        let s = delta_eff + self.xi * u;
        u * (s * s + self.half_gamma().powi(2)) - self.f0 * self.f0
    }

    /// Largest possible steady-state u, reached where Δ_eff + ξu = 0.
    pub fn peak_u(&self) -> f64 {
        (self.f0 / self.half_gamma()).powi(2)
    }

    pub fn roots(&self, delta_eff: f64) -> Vec<SteadyStateSolution> {
        roots_impl(self, delta_eff)
    }
}

/// Critical reduced drive f₀ at which bistability first appears.
pub fn critical_drive(gamma: f64, xi: f64) -> f64 {
    (CRITICAL_SCALED_DRIVE * (0.5 * gamma).powi(3) / xi).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stability {
    Stable,
    Unstable,
}

/// Which side of the fold a root sits on.
///
/// A root belongs to the upper branch when Δ_eff + ξu lies above −γ/(2√3), the
/// point between the two fold points; the unstable middle root can fall on either side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Lower,
    Upper,
}

impl Branch {
    pub fn of(u: f64, delta_eff: f64, params: &DuffingParams) -> Branch {
        let s = delta_eff + params.xi * u;
        if s > -params.half_gamma() / 3f64.sqrt() {
            Branch::Upper
        } else {
            Branch::Lower
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Lower => "lower",
            Branch::Upper => "upper",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateSolution {
    /// |α₀|², m².
    pub u: f64,
    /// |α₀|, m.
    pub amplitude: f64,
    pub stability: Stability,
    pub jacobian_eigs: [Complex64; 2],
    /// Set when two roots merged within [`ROOT_MERGE_TOLERANCE`].
    pub degenerate: bool,
}

impl SteadyStateSolution {
    pub fn is_stable(&self) -> bool {
        self.stability == Stability::Stable
    }
}

/// All real non-negative steady states at `delta_eff`, ascending in u.
pub fn steady_state_roots(
    delta_eff: f64,
    f0_reduced: f64,
    gamma: f64,
    xi: f64,
) -> Result<Vec<SteadyStateSolution>> {
    let params = DuffingParams::new(f0_reduced, gamma, xi)?;
    Ok(roots_impl(&params, delta_eff))
}

fn roots_impl(params: &DuffingParams, delta_eff: f64) -> Vec<SteadyStateSolution> {
    let g = params.half_gamma();
    if params.f0 == 0.0 {
        return vec![solution(params, delta_eff, 0.0, false)];
    }
    if params.xi == 0.0 {
        let u = params.f0 * params.f0 / (delta_eff * delta_eff + g * g);
        return vec![solution(params, delta_eff, u, false)];
    }
    let d = delta_eff / g;
    let f = params.scaled_drive();
    let roots = cubic::solve_monic(2.0 * d, d * d + 1.0, -f);
    let to_u = g / params.xi;

    let mut merged: Vec<(f64, bool)> = Vec::with_capacity(3);
    for &v in roots.as_slice() {
        // all real roots are positive for f > 0; guard against rounding
        let v = v.max(0.0);
        match merged.last_mut() {
            Some((prev, deg)) if (v - *prev).abs() <= ROOT_MERGE_TOLERANCE * v.abs().max(prev.abs()) => {
                *prev = 0.5 * (*prev + v);
                *deg = true;
            }
            _ => merged.push((v, false)),
        }
    }
    merged
        .into_iter()
        .map(|(v, deg)| solution(params, delta_eff, v * to_u, deg))
        .collect()
}

fn solution(params: &DuffingParams, delta_eff: f64, u: f64, degenerate: bool) -> SteadyStateSolution {
    let (mut stability, eigs) = linearization(params, delta_eff, u);
    if degenerate {
        stability = Stability::Unstable;
    }
    SteadyStateSolution { u, amplitude: u.sqrt(), stability, jacobian_eigs: eigs, degenerate }
}

/// Eigenvalues of the real 2-D flow of the envelope equation linearised at a fixed point.
///
/// With s = Δ_eff + ξu the Jacobian has trace −γ and determinant (γ/2)² + s² + 2ξsu,
/// so λ = −γ/2 ± √(−s² − 2ξsu).
fn linearization(params: &DuffingParams, delta_eff: f64, u: f64) -> (Stability, [Complex64; 2]) {
    let g = params.half_gamma();
    let s = delta_eff + params.xi * u;
    let det = g * g + s * s + 2.0 * params.xi * s * u;
    let disc = -(s * s + 2.0 * params.xi * s * u);
    let root = Complex64::new(disc, 0.0).sqrt();
    let eigs = [Complex64::new(-g, 0.0) + root, Complex64::new(-g, 0.0) - root];
    let stable = det > 0.0 && eigs.iter().all(|e| e.re < 0.0);
    (if stable { Stability::Stable } else { Stability::Unstable }, eigs)
}

/// Stability of a steady state, rejecting inputs that are not roots.
pub fn classify_stability(
    u: f64,
    delta_eff: f64,
    f0_reduced: f64,
    gamma: f64,
    xi: f64,
) -> Result<(Stability, [Complex64; 2])> {
    let params = DuffingParams::new(f0_reduced, gamma, xi)?;
    if !(u.is_finite() && u >= 0.0) {
        return Err(Error::Domain(format!("u must be ≥ 0, got {u}")));
    }
    let res = params.residual(u, delta_eff).abs();
    if res > ROOT_ACCEPT_TOLERANCE * f0_reduced * f0_reduced {
        return Err(Error::Domain(format!(
            "u = {u:e} is not a steady state (relative residual {:e})",
            res / (f0_reduced * f0_reduced).max(f64::MIN_POSITIVE)
        )));
    }
    Ok(linearization(&params, delta_eff, u))
}
