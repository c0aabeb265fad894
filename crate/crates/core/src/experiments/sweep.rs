use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::dynamics::{dwell_average, EnvelopeState};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::{Cell, CsvTable};
use crate::steady::{
    bistable_region, critical_drive, BistableRegion, Branch, BranchTracker, DuffingParams, SweepPoint,
};
use crate::trap::{equilibrium_displacement, DriveConfig, TrapParams};
use crate::units::{rad_to_hz, MICROMETER, ZEPTONEWTON};

/// Ratio of the jump threshold to the largest continuous step on the weak-drive reference.
pub const JUMP_THRESHOLD_FACTOR: f64 = 3.0;

/// Reference drive for the jump threshold, as a fraction of the critical drive.
pub const REFERENCE_DRIVE_FRACTION: f64 = 0.1;

/// Upper bound on the jump threshold for coarse grids that resolve the bare resonance poorly.
pub const MAX_JUMP_THRESHOLD: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Ascending,
    Descending,
}

impl Direction {
    pub fn as_str(&self) -> &'static str {
        match self {
            Direction::Ascending => "ascending",
            Direction::Descending => "descending",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Directions {
    Ascending,
    Descending,
    Both,
}

impl Directions {
    pub fn list(&self) -> Vec<Direction> {
        match self {
            Directions::Ascending => vec![Direction::Ascending],
            Directions::Descending => vec![Direction::Descending],
            Directions::Both => vec![Direction::Ascending, Direction::Descending],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SweepModel {
    QuasiStatic,
    /// Envelope integration at fixed step `dt` (s), carrying the state between dwells.
    Envelope { dt: f64 },
}

impl SweepModel {
    /// Envelope integration at 64 steps per axial period.
    pub fn envelope(p: &TrapParams) -> Self {
        SweepModel::Envelope { dt: TAU / (64.0 * p.omega_z) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepExperimentConfig {
    pub trap: TrapParams,
    pub directions: Directions,
    /// Lower end of the detuning range, rad/s.
    pub detuning_min: f64,
    /// Upper end of the detuning range, rad/s.
    pub detuning_max: f64,
    /// Step magnitude, rad/s.
    pub step: f64,
    /// Dwell per step, s. Only the envelope model integrates over it.
    pub dwell: f64,
    /// Radial drive magnitudes F₀, N.
    pub drives: Vec<f64>,
    pub model: SweepModel,
}

impl SweepExperimentConfig {
    /// Quasi-static sweep with a dwell of 20/γ.
    pub fn new(trap: TrapParams, detuning_min: f64, detuning_max: f64, step: f64, drives: Vec<f64>) -> Self {
        Self {
            trap,
            directions: Directions::Both,
            detuning_min,
            detuning_max,
            step,
            dwell: 20.0 / trap.damping,
            drives,
            model: SweepModel::QuasiStatic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.trap.validate()?;
        if !(self.detuning_min.is_finite() && self.detuning_max.is_finite() && self.detuning_min < self.detuning_max)
        {
            return Err(Error::param("detuning_range", "need finite min < max"));
        }
        if !(self.step > 0.0 && self.step < self.trap.damping / 4.0) {
            return Err(Error::param("step", "must be in (0, γ/4)"));
        }
        if !(self.dwell >= 10.0 / self.trap.damping) {
            return Err(Error::param("dwell", "must be at least 10/γ for quasi-static validity"));
        }
        if self.drives.is_empty() {
            return Err(Error::param("drives", "at least one drive value is required"));
        }
        for &f in &self.drives {
            DriveConfig::radial(&self.trap, f, 0.0).validate()?;
        }
        if let SweepModel::Envelope { dt } = self.model {
            if !(dt > 0.0 && dt < self.dwell) {
                return Err(Error::param("dt", "envelope step must be in (0, dwell)"));
            }
        }
        Ok(())
    }

}

/// One directional sweep at one drive value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTrace {
    pub direction: Direction,
    pub points: Vec<SweepPoint>,
    /// Detunings of the threshold-detected jumps, midway between the two steps, rad/s.
    pub jumps: Vec<f64>,
}

impl SweepTrace {
    pub fn first_jump(&self) -> Option<f64> {
        self.jumps.first().copied()
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["detuning_hz", "alpha_abs_um", "z0_um", "branch", "jumped"]);
        t.meta("direction", self.direction.as_str());
        for p in &self.points {
            t.row(&[
                Cell::Num(rad_to_hz(p.detuning)),
                Cell::Num(p.amplitude / MICROMETER),
                Cell::Num(p.z0 / MICROMETER),
                Cell::Text(p.branch.as_str()),
                Cell::Bool(p.jumped),
            ]);
        }
        t
    }
}

/// Both sweep directions at one drive value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveSweep {
    /// F₀, N.
    pub f0_force: f64,
    pub region: BistableRegion,
    pub traces: Vec<SweepTrace>,
}

impl DriveSweep {
    pub fn trace(&self, dir: Direction) -> Option<&SweepTrace> {
        self.traces.iter().find(|t| t.direction == dir)
    }

    /// Ascending jump-up minus descending jump-down detuning; 0 without jumps.
    pub fn hysteresis_width(&self) -> f64 {
        let up = self.trace(Direction::Ascending).and_then(SweepTrace::first_jump);
        let down = self.trace(Direction::Descending).and_then(SweepTrace::first_jump);
        match (up, down) {
            (Some(u), Some(d)) => u - d,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub drives: Vec<DriveSweep>,
    /// Jump threshold on the relative change |Δu|/max(u) between steps.
    pub threshold: f64,
}

impl SweepResult {
    /// One row per detected jump.
    pub fn jumps_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&[
            "f0_zn",
            "direction",
            "jump_detuning_hz",
            "region_lower_hz",
            "region_upper_hz",
        ]);
        t.meta("threshold", self.threshold);
        for d in &self.drives {
            for tr in &d.traces {
                for j in &tr.jumps {
                    t.row(&[
                        Cell::Num(d.f0_force / ZEPTONEWTON),
                        Cell::Text(tr.direction.as_str()),
                        Cell::Num(rad_to_hz(*j)),
                        Cell::Num(rad_to_hz(d.region.delta_lower)),
                        Cell::Num(rad_to_hz(d.region.delta_upper)),
                    ]);
                }
            }
        }
        t
    }
}

/// Relative change |Δu|/max(u) between consecutive steps.
fn relative_step(a: &SweepPoint, b: &SweepPoint) -> f64 {
    let scale = a.u.max(b.u);
    if scale > 0.0 {
        (b.u - a.u).abs() / scale
    } else {
        0.0
    }
}

fn max_relative_step(points: &[SweepPoint]) -> f64 {
    points.windows(2).map(|w| relative_step(&w[0], &w[1])).fold(0.0, f64::max)
}

/// Midpoints of consecutive steps whose relative |Δu| exceeds `threshold`.
pub fn extract_jumps(points: &[SweepPoint], threshold: f64) -> Vec<f64> {
    points
        .windows(2)
        .filter(|w| relative_step(&w[0], &w[1]) > threshold)
        .map(|w| 0.5 * (w[0].detuning + w[1].detuning))
        .collect()
}

/// Runs every drive value in both requested directions and extracts jumps.
pub fn run_sweep(cfg: &SweepExperimentConfig, exec: Execution) -> Result<SweepResult> {
    cfg.validate()?;
    let p = cfg.trap;
    let f_ref = REFERENCE_DRIVE_FRACTION * p.radial_force(critical_drive(p.damping, p.xi()));
    let reference = directional(cfg, f_ref, Direction::Ascending)?;
    let threshold = (JUMP_THRESHOLD_FACTOR * max_relative_step(&reference)).min(MAX_JUMP_THRESHOLD);

    let jobs: Vec<(usize, Direction)> = cfg
        .drives
        .iter()
        .enumerate()
        .flat_map(|(i, _)| cfg.directions.list().into_iter().map(move |d| (i, d)))
        .collect();
    let runs = exec.map(&jobs, |&(i, dir)| directional(cfg, cfg.drives[i], dir));

    let mut drives: Vec<DriveSweep> = Vec::with_capacity(cfg.drives.len());
    for &f in &cfg.drives {
        let region = bistable_region(p.reduced_drive(f), p.damping, p.xi())?;
        drives.push(DriveSweep { f0_force: f, region, traces: Vec::new() });
    }
    for (&(i, direction), run) in jobs.iter().zip(runs) {
        let points = run?;
        let jumps = extract_jumps(&points, threshold);
        drives[i].traces.push(SweepTrace { direction, points, jumps });
    }
    Ok(SweepResult { drives, threshold })
}

/// Detuning grid shared by both directions so that their points coincide.
fn grid(cfg: &SweepExperimentConfig, dir: Direction) -> Vec<f64> {
    let n = ((cfg.detuning_max - cfg.detuning_min) / cfg.step + 1e-9).floor() as usize + 1;
    let up = (0..n).map(|k| cfg.detuning_min + k as f64 * cfg.step);
    match dir {
        Direction::Ascending => up.collect(),
        Direction::Descending => up.rev().collect(),
    }
}

fn directional(cfg: &SweepExperimentConfig, f0_force: f64, dir: Direction) -> Result<Vec<SweepPoint>> {
    let p = &cfg.trap;
    let grid = grid(cfg, dir);
    match cfg.model {
        SweepModel::QuasiStatic => quasi_static_sweep(p, f0_force, &grid),
        SweepModel::Envelope { dt } => envelope_sweep(p, f0_force, &grid, cfg.dwell, dt),
    }
}

fn quasi_static_sweep(p: &TrapParams, f0_force: f64, grid: &[f64]) -> Result<Vec<SweepPoint>> {
    let params = DuffingParams::new(p.reduced_drive(f0_force), p.damping, p.xi())?;
    let mut tracker = BranchTracker::new(params, grid[0], Branch::Lower)?;
    let mut points = Vec::with_capacity(grid.len());
    for (k, &delta) in grid.iter().enumerate() {
        let jumped = k > 0 && tracker.advance(delta, delta)?;
        let u = tracker.current_u;
        points.push(SweepPoint {
            detuning: delta,
            u,
            amplitude: u.sqrt(),
            branch: tracker.branch,
            jumped,
            z0: equilibrium_displacement(p, u, 0.0),
        });
    }
    Ok(points)
}

fn envelope_sweep(p: &TrapParams, f0_force: f64, grid: &[f64], dwell: f64, dt: f64) -> Result<Vec<SweepPoint>> {
    let params = DuffingParams::new(p.reduced_drive(f0_force), p.damping, p.xi())?;
    let mut state = EnvelopeState::default();
    let mut points: Vec<SweepPoint> = Vec::with_capacity(grid.len());
    for &delta in grid {
        let d = DriveConfig::radial(p, f0_force, delta);
        let avg = dwell_average(state, p, &d, dwell, dt)?;
        state = avg.end;
        let u = avg.mean_alpha_sq;
        let branch = Branch::of(u, delta, &params);
        let jumped = points.last().is_some_and(|q| q.branch != branch);
        points.push(SweepPoint { detuning: delta, u, amplitude: u.sqrt(), branch, jumped, z0: avg.mean_z });
    }
    Ok(points)
}
