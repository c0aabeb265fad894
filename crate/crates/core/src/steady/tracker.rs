use serde::{Deserialize, Serialize};

use super::{Branch, DuffingParams, SteadyStateSolution};
use crate::error::{Error, Result};
use crate::io::{Cell, CsvTable};
use crate::trap::{equilibrium_displacement, DriveConfig, TrapParams};
use crate::units::{rad_to_hz, MICROMETER};

/// A transfer between branches after a saddle-node was passed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Jump {
    /// Time or detuning at which the jump was taken, depending on the caller.
    pub at: f64,
    pub from_u: f64,
    pub to_u: f64,
    pub to: Branch,
}

/// Quasi-static follower of the occupied stable branch.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchTracker {
    params: DuffingParams,
    pub current_u: f64,
    pub branch: Branch,
    pub delta_eff: f64,
    pub jump_log: Vec<Jump>,
}

impl BranchTracker {
    /// Starts on the stable root of the preferred branch, or on the only stable root.
    pub fn new(params: DuffingParams, delta_eff: f64, prefer: Branch) -> Result<Self> {
        params.validate()?;
        let roots = params.roots(delta_eff);
        let stable: Vec<&SteadyStateSolution> = roots.iter().filter(|r| r.is_stable()).collect();
        let pick = stable
            .iter()
            .find(|r| Branch::of(r.u, delta_eff, &params) == prefer)
            .or_else(|| stable.first())
            .ok_or_else(|| no_stable_root(delta_eff))?;
        Ok(Self {
            params,
            current_u: pick.u,
            branch: Branch::of(pick.u, delta_eff, &params),
            delta_eff,
            jump_log: Vec::new(),
        })
    }

    pub fn params(&self) -> &DuffingParams {
        &self.params
    }

    /// Moves to a new effective detuning. Returns true when a jump occurred.
    ///
    /// `at` labels the jump log entry (a time or the detuning itself).
    pub fn advance(&mut self, delta_eff: f64, at: f64) -> Result<bool> {
        let roots = self.params.roots(delta_eff);
        let mut same = None;
        let mut other = None;
        for r in roots.iter().filter(|r| r.is_stable()) {
            if Branch::of(r.u, delta_eff, &self.params) == self.branch {
                same = Some(r.u);
            } else {
                other = Some(r.u);
            }
        }
        self.delta_eff = delta_eff;
        match (same, other) {
            (Some(u), _) => {
                self.current_u = u;
                Ok(false)
            }
            (None, Some(u)) => {
                let to = Branch::of(u, delta_eff, &self.params);
                // Below the critical drive the label may change continuously.
                let jumped = self.params.is_bistable();
                if jumped {
                    self.jump_log.push(Jump { at, from_u: self.current_u, to_u: u, to });
                }
                self.current_u = u;
                self.branch = to;
                Ok(jumped)
            }
            (None, None) => Err(no_stable_root(delta_eff)),
        }
    }
}

fn no_stable_root(delta_eff: f64) -> Error {
    Error::Domain(format!("no stable steady state at Δ_eff = {delta_eff:e} rad/s"))
}

/// Functional form of [`BranchTracker::advance`], logging jumps at the detuning.
pub fn track_branch(mut tracker: BranchTracker, delta_eff: f64) -> Result<BranchTracker> {
    tracker.advance(delta_eff, delta_eff)?;
    Ok(tracker)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    /// Δ, rad/s.
    pub detuning: f64,
    pub u: f64,
    pub amplitude: f64,
    pub branch: Branch,
    pub jumped: bool,
    /// Axial equilibrium at this amplitude, m.
    pub z0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub points: Vec<SweepPoint>,
    /// Detunings at which the tracker jumped.
    pub jumps: Vec<f64>,
}

impl SweepRecord {
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["detuning_hz", "u_m2", "amplitude_um", "branch", "jumped", "z0_um"]);
        for p in &self.points {
            t.row(&[
                Cell::Num(rad_to_hz(p.detuning)),
                Cell::Num(p.u),
                Cell::Num(p.amplitude / MICROMETER),
                Cell::Text(p.branch.as_str()),
                Cell::Bool(p.jumped),
                Cell::Num(p.z0 / MICROMETER),
            ]);
        }
        t
    }
}

/// Quasi-static sweep of the radial detuning Δ with no axial force applied.
///
/// Starts on the lower branch if the first detuning is inside the bistable window.
pub fn hysteresis_sweep(
    p: &TrapParams,
    d: &DriveConfig,
    delta_start: f64,
    delta_end: f64,
    step: f64,
) -> Result<SweepRecord> {
    p.validate()?;
    d.validate()?;
    if step == 0.0 || !step.is_finite() {
        return Err(Error::Precondition("sweep step must be non-zero".into()));
    }
    if delta_end != delta_start && (delta_end - delta_start).signum() != step.signum() {
        return Err(Error::Precondition("step sign does not match the sweep direction".into()));
    }
    if step.abs() >= p.damping / 4.0 {
        return Err(Error::Precondition(format!(
            "|step| = {:e} rad/s must be below γ/4 = {:e} rad/s",
            step.abs(),
            p.damping / 4.0
        )));
    }
    let params = DuffingParams::new(p.reduced_drive(d.f0_force), p.damping, p.xi())?;
    let n = ((delta_end - delta_start) / step + 1e-9).floor() as usize + 1;
    let mut tracker = BranchTracker::new(params, delta_start, Branch::Lower)?;
    let mut points = Vec::with_capacity(n);
    let mut jumps = Vec::new();
    for k in 0..n {
        let delta = delta_start + k as f64 * step;
        let jumped = if k == 0 { false } else { tracker.advance(delta, delta)? };
        if jumped {
            jumps.push(delta);
        }
        points.push(SweepPoint {
            detuning: delta,
            u: tracker.current_u,
            amplitude: tracker.current_u.sqrt(),
            branch: tracker.branch,
            jumped,
            z0: equilibrium_displacement(p, tracker.current_u, 0.0),
        });
    }
    Ok(SweepRecord { points, jumps })
}
