use std::f64::consts::TAU;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::{AxialSample, IntegratorSettings, Model, Trajectory, TrajectoryMeta};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::io::{Cell, CsvTable};
use crate::measurement::{
    amplitude_spectrum, enhancement_factor, peak_amplitude, sample_camera_with_rng, CameraConfig, SampledTrace,
    SpectrumRecord,
};
use crate::steady::{bistable_region, BistableRegion, Branch, BranchTracker, DuffingParams, Jump};
use crate::trap::{axial_force, equilibrium_displacement, DriveConfig, TrapParams};
use crate::units::{MICROMETER, ZEPTONEWTON};

/// Samples per enhancement period in stage simulations.
pub const SAMPLES_PER_ENHANCEMENT_PERIOD: f64 = 40.0;

/// Default duration of the noiseless tuning records, s.
pub const TUNE_DURATION: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// Signal only.
    A,
    /// Signal and radial drive.
    C,
    /// Signal, radial drive and enhancement force.
    E,
}

impl Stage {
    pub const ALL: [Stage; 3] = [Stage::A, Stage::C, Stage::E];

    pub fn as_str(&self) -> &'static str {
        match self {
            Stage::A => "a",
            Stage::C => "c",
            Stage::E => "e",
        }
    }

    fn stream(&self) -> u64 {
        match self {
            Stage::A => 0,
            Stage::C => 1,
            Stage::E => 2,
        }
    }

    /// The drive restricted to the channels this stage switches on.
    pub fn drive(&self, d: &DriveConfig) -> DriveConfig {
        match self {
            Stage::A => DriveConfig { f0_force: 0.0, fe_force: 0.0, ..*d },
            Stage::C => DriveConfig { fe_force: 0.0, ..*d },
            Stage::E => *d,
        }
    }
}

impl std::str::FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Stage::A),
            "c" => Ok(Stage::C),
            "e" => Ok(Stage::E),
            _ => Err(Error::Input(format!("unknown stage `{s}`, expected a, c or e"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preparation {
    Lower,
    Upper,
}

impl From<Preparation> for Branch {
    fn from(p: Preparation) -> Branch {
        match p {
            Preparation::Lower => Branch::Lower,
            Preparation::Upper => Branch::Upper,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VibresStageConfig {
    pub stage: Stage,
    pub trap: TrapParams,
    pub drive: DriveConfig,
    pub camera: CameraConfig,
    /// Record duration, s.
    pub duration: f64,
    pub preparation: Preparation,
}

impl VibresStageConfig {
    pub fn validate(&self) -> Result<()> {
        self.trap.validate()?;
        self.drive.validate()?;
        self.camera.validate()?;
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::param("duration", "must be > 0"));
        }
        let d = &self.drive;
        let ok = match self.stage {
            Stage::A => d.f0_force == 0.0 && d.fe_force == 0.0,
            Stage::C => d.fe_force == 0.0,
            Stage::E => d.f0_force > 0.0 && d.fs_force > 0.0 && d.fe_force > 0.0,
        };
        if !ok {
            let need = match self.stage {
                Stage::A => "stage a needs F₀ = 0 and F_e = 0",
                Stage::C => "stage c needs F_e = 0",
                Stage::E => "stage e needs all three channels on",
            };
            return Err(Error::Precondition(need.into()));
        }
        if self.drive.omega_s <= 0.0 {
            return Err(Error::param("omega_s", "signal frequency must be > 0"));
        }
        Ok(())
    }
}

/// One sample of a quasi-static stage record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuasiStaticSample {
    pub t: f64,
    /// |α|², m².
    pub u: f64,
    /// Axial equilibrium, m.
    pub z: f64,
    pub branch: Branch,
}

impl AxialSample for QuasiStaticSample {
    fn time(&self) -> f64 {
        self.t
    }
    fn axial(&self) -> f64 {
        self.z
    }
    fn radial(&self) -> f64 {
        self.u.sqrt()
    }
    fn radial_column() -> &'static str {
        "alpha_abs"
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuasiStaticRun {
    pub trajectory: Trajectory<QuasiStaticSample>,
    /// Jumps with `at` in seconds.
    pub jumps: Vec<Jump>,
}

/// Sampling step for stage records: 40 samples per enhancement period, or 1 ms
/// without enhancement, and never coarser than a twentieth of the frame period.
pub fn stage_sample_interval(d: &DriveConfig, cam: &CameraConfig) -> f64 {
    let base = if d.fe_force > 0.0 && d.omega_e > 0.0 {
        TAU / (SAMPLES_PER_ENHANCEMENT_PERIOD * d.omega_e)
    } else {
        1e-3
    };
    base.min(cam.frame_period() / 20.0)
}

/// Follows the occupied branch under the axial detuning modulation δ(t).
///
/// The radial mode is slaved to Δ_eff(t) = Δ − δ(t) and the axial coordinate to its
/// static equilibrium at each sample.
pub fn simulate_quasi_static(
    p: &TrapParams,
    d: &DriveConfig,
    duration: f64,
    dt: f64,
    preparation: Preparation,
) -> Result<QuasiStaticRun> {
    p.validate()?;
    d.validate()?;
    if !(dt > 0.0 && duration >= dt) {
        return Err(Error::param("dt", "need 0 < dt ≤ duration"));
    }
    let params = DuffingParams::new(p.reduced_drive(d.f0_force), p.damping, p.xi())?;
    let delta = d.detuning(p);
    let k_delta = p.detuning_per_force();
    let n = (duration / dt + 1e-9).floor() as usize;
    let mut tracker = BranchTracker::new(params, delta - k_delta * axial_force(d, 0.0), preparation.into())?;
    let mut states = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * dt;
        let fz = axial_force(d, t);
        if k > 0 {
            tracker.advance(delta - k_delta * fz, t)?;
        }
        states.push(QuasiStaticSample {
            t,
            u: tracker.current_u,
            z: equilibrium_displacement(p, tracker.current_u, fz),
            branch: tracker.branch,
        });
    }
    let meta = TrajectoryMeta {
        model: Model::QuasiStatic,
        trap: *p,
        drive: *d,
        settings: IntegratorSettings::new(dt),
        seed: None,
    };
    Ok(QuasiStaticRun { trajectory: Trajectory { states, meta }, jumps: tracker.jump_log })
}

/// Camera record, spectrum and signal peak of one noise realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub trace: SampledTrace,
    pub spectrum: SpectrumRecord,
    /// Spectral amplitude at ω_s, m.
    pub peak: f64,
}

/// Samples a stage record with noise stream `stream` of `cam.seed`.
pub fn observe(
    traj: &Trajectory<QuasiStaticSample>,
    cam: &CameraConfig,
    signal_hz: f64,
    stream: u64,
) -> Result<Observation> {
    let span = traj.last().t - traj.states[0].t;
    let mut rng = ChaCha8Rng::seed_from_u64(cam.seed);
    rng.set_stream(stream);
    let trace = sample_camera_with_rng(traj, cam, cam.frames_in(span), &mut rng)?;
    let spectrum = amplitude_spectrum(&trace)?;
    let peak = peak_amplitude(&spectrum, signal_hz)?;
    Ok(Observation { trace, spectrum, peak })
}

fn noise_stream(stage: Stage, seed_index: u64) -> u64 {
    (stage.stream() << 32) | seed_index
}

/// Outcome of one stage with the first noise realisation.
#[derive(Debug, Clone, PartialEq)]
pub struct StageOutcome {
    pub stage: Stage,
    pub run: QuasiStaticRun,
    pub observation: Observation,
    /// Stage e produced no jumps: F_e lies outside the operating window.
    pub untuned: bool,
}

pub fn run_vibres_stage(cfg: &VibresStageConfig) -> Result<StageOutcome> {
    cfg.validate()?;
    let dt = stage_sample_interval(&cfg.drive, &cfg.camera);
    let run = simulate_quasi_static(&cfg.trap, &cfg.drive, cfg.duration, dt, cfg.preparation)?;
    let observation = observe(&run.trajectory, &cfg.camera, cfg.drive.omega_s / TAU, noise_stream(cfg.stage, 0))?;
    let untuned = cfg.stage == Stage::E && run.jumps.is_empty();
    if untuned {
        log::warn!("stage e produced no jumps; F_e is outside the operating window");
    }
    Ok(StageOutcome { stage: cfg.stage, run, observation, untuned })
}

/// Detuning amplitude per unit axial force applied to a force amplitude.
fn swing(p: &TrapParams, force: f64) -> f64 {
    p.detuning_per_force() * force
}

fn region_of(p: &TrapParams, d: &DriveConfig) -> Result<BistableRegion> {
    let region = bistable_region(p.reduced_drive(d.f0_force), p.damping, p.xi())?;
    if !region.exists {
        return Err(Error::Precondition(format!(
            "no bistable region at F₀ = {:.3} zN",
            d.f0_force / ZEPTONEWTON
        )));
    }
    Ok(region)
}

/// The drive with its detuning moved to the centre of the bistable window.
pub fn center_on_window(p: &TrapParams, d: &DriveConfig) -> Result<DriveConfig> {
    let region = region_of(p, d)?;
    Ok(d.with_detuning(p, 0.5 * (region.delta_lower + region.delta_upper)))
}

/// F_e interval (N) whose detuning swing lies within δ(F_s) of the window half-width.
pub fn operating_window(p: &TrapParams, d: &DriveConfig) -> Result<(f64, f64)> {
    let region = region_of(p, d)?;
    let half = 0.5 * region.width();
    let ds = swing(p, d.fs_force);
    let k = p.detuning_per_force();
    Ok((((half - ds) / k).max(0.0), (half + ds) / k))
}

/// F_e = 0 followed by `points` values spanning twice the operating window.
pub fn default_fe_scan(p: &TrapParams, d: &DriveConfig, points: usize) -> Result<Vec<f64>> {
    let (lo, hi) = operating_window(p, d)?;
    let (c, w) = (0.5 * (lo + hi), hi - lo);
    let (a, b) = ((c - w).max(0.0), c + w);
    let mut scan = vec![0.0];
    match points {
        0 => {}
        1 => scan.push(c),
        _ => scan.extend((0..points).map(|i| a + (b - a) * i as f64 / (points - 1) as f64)),
    }
    Ok(scan)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TunePoint {
    /// F_e, N.
    pub fe_force: f64,
    pub factor: f64,
    pub jumps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best_fe: f64,
    pub best_factor: f64,
    pub curve: Vec<TunePoint>,
}

impl TuneResult {
    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["fe_zn", "factor", "jumps"]);
        for c in &self.curve {
            t.row(&[Cell::Num(c.fe_force / ZEPTONEWTON), Cell::Num(c.factor), Cell::Int(c.jumps as i64)]);
        }
        t
    }
}

/// Scans F_e with noiseless stage-e records and picks the largest factor against stage a.
///
/// The detuning of `d` is used as given.
pub fn tune_enhancement(
    p: &TrapParams,
    d: &DriveConfig,
    camera: &CameraConfig,
    scan: &[f64],
    duration: f64,
    exec: Execution,
) -> Result<TuneResult> {
    region_of(p, d)?;
    if scan.is_empty() || scan.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(Error::Precondition("F_e scan must be non-empty and non-negative".into()));
    }
    let cam = camera.noiseless();
    let f_s = d.omega_s / TAU;
    let ref_drive = Stage::A.drive(d);
    let reference = simulate_quasi_static(p, &ref_drive, duration, stage_sample_interval(&ref_drive, &cam), Preparation::Lower)?;
    let ref_obs = observe(&reference.trajectory, &cam, f_s, 0)?;

    let curve = exec.map(scan, |&fe| -> Result<TunePoint> {
        let de = DriveConfig { fe_force: fe, ..*d };
        let run = simulate_quasi_static(p, &de, duration, stage_sample_interval(&de, &cam), Preparation::Lower)?;
        let obs = observe(&run.trajectory, &cam, f_s, 0)?;
        let e = enhancement_factor(&obs.spectrum, &ref_obs.spectrum, f_s)?;
        Ok(TunePoint { fe_force: fe, factor: e.factor, jumps: run.jumps.len() })
    });
    let curve: Vec<TunePoint> = curve.into_iter().collect::<Result<_>>()?;
    let best = curve
        .iter()
        .fold(None::<&TunePoint>, |acc, c| match acc {
            Some(b) if b.factor >= c.factor => Some(b),
            _ => Some(c),
        })
        .expect("scan is non-empty");
    Ok(TuneResult { best_fe: best.fe_force, best_factor: best.factor, curve })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Enhancement {
    /// Tune over `points` F_e values around the operating window.
    Tune { points: usize, duration: f64 },
    /// Use the configured F_e.
    Fixed,
}

/// Multi-seed three-stage protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VibresProtocol {
    pub trap: TrapParams,
    pub drive: DriveConfig,
    pub camera: CameraConfig,
    /// Record duration, s.
    pub duration: f64,
    pub noise_seeds: usize,
    pub stages: Vec<Stage>,
    pub enhancement: Enhancement,
    /// Move the detuning to the centre of the bistable window before running.
    pub center: bool,
}

impl VibresProtocol {
    pub fn new(trap: TrapParams, drive: DriveConfig, camera: CameraConfig) -> Self {
        Self {
            trap,
            drive,
            camera,
            duration: 120.0,
            noise_seeds: 50,
            stages: Stage::ALL.to_vec(),
            enhancement: Enhancement::Tune { points: 41, duration: TUNE_DURATION },
            center: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FactorStats {
    pub median: f64,
    pub min: f64,
    pub max: f64,
    /// Realisations whose reference peak was below its noise floor.
    pub floor_limited: usize,
}

/// Spread of jump times modulo the signal period, as circular standard deviations
/// in units of the period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseLock {
    pub up: f64,
    pub down: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub stage: Stage,
    pub drive: DriveConfig,
    /// First noise realisation.
    pub observation: Observation,
    /// Signal peak of every realisation, m.
    pub peaks: Vec<f64>,
    pub median_peak: f64,
    pub jumps: Vec<Jump>,
    pub untuned: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VibresReport {
    /// Operating detuning Δ, rad/s.
    pub detuning: f64,
    pub region: BistableRegion,
    /// F_e used in stage e, N.
    pub fe_force: f64,
    pub tune: Option<TuneResult>,
    pub stages: Vec<StageReport>,
    pub e_vs_a: Option<FactorStats>,
    pub e_vs_c: Option<FactorStats>,
    pub c_vs_a: Option<FactorStats>,
    pub phase_lock: Option<PhaseLock>,
    pub noise_seeds: usize,
    pub duration: f64,
}

impl VibresReport {
    pub fn stage(&self, s: Stage) -> Option<&StageReport> {
        self.stages.iter().find(|r| r.stage == s)
    }
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Circular standard deviation of `times` modulo `period`, in units of the period.
pub fn circular_std(times: &[f64], period: f64) -> f64 {
    if times.is_empty() {
        return f64::NAN;
    }
    let (s, c) = times.iter().fold((0.0, 0.0), |(s, c), t| {
        let phi = TAU * (t / period).fract();
        (s + phi.sin(), c + phi.cos())
    });
    let r = ((s * s + c * c).sqrt() / times.len() as f64).min(1.0);
    (-2.0 * r.max(f64::MIN_POSITIVE).ln()).sqrt() / TAU
}

pub fn phase_lock(jumps: &[Jump], period: f64) -> PhaseLock {
    let times = |b: Branch| jumps.iter().filter(|j| j.to == b).map(|j| j.at).collect::<Vec<_>>();
    PhaseLock { up: circular_std(&times(Branch::Upper), period), down: circular_std(&times(Branch::Lower), period) }
}

/// Runs the requested stages with `noise_seeds` camera realisations each.
pub fn run_vibres(proto: &VibresProtocol, exec: Execution) -> Result<VibresReport> {
    let p = proto.trap;
    p.validate()?;
    proto.camera.validate()?;
    if proto.noise_seeds == 0 {
        return Err(Error::param("noise_seeds", "must be ≥ 1"));
    }
    if proto.stages.is_empty() {
        return Err(Error::param("stages", "at least one stage is required"));
    }
    let mut drive = if proto.center { center_on_window(&p, &proto.drive)? } else { proto.drive };
    let region = bistable_region(p.reduced_drive(drive.f0_force), p.damping, p.xi())?;
    let mut tune = None;
    if proto.stages.contains(&Stage::E) {
        if let Enhancement::Tune { points, duration } = proto.enhancement {
            let scan = default_fe_scan(&p, &drive, points)?;
            let t = tune_enhancement(&p, &drive, &proto.camera, &scan, duration, exec)?;
            drive.fe_force = t.best_fe;
            tune = Some(t);
        }
    }

    let f_s = drive.omega_s / TAU;
    let mut stages = proto.stages.clone();
    stages.sort();
    stages.dedup();
    let runs = exec.map(&stages, |&stage| -> Result<(QuasiStaticRun, DriveConfig)> {
        let cfg = VibresStageConfig {
            stage,
            trap: p,
            drive: stage.drive(&drive),
            camera: proto.camera,
            duration: proto.duration,
            preparation: Preparation::Lower,
        };
        cfg.validate()?;
        let dt = stage_sample_interval(&cfg.drive, &cfg.camera);
        Ok((simulate_quasi_static(&p, &cfg.drive, cfg.duration, dt, cfg.preparation)?, cfg.drive))
    });
    let runs: Vec<(QuasiStaticRun, DriveConfig)> = runs.into_iter().collect::<Result<_>>()?;

    let jobs: Vec<(usize, u64)> =
        (0..stages.len()).flat_map(|i| (0..proto.noise_seeds as u64).map(move |k| (i, k))).collect();
    let observed = exec.map(&jobs, |&(i, k)| {
        observe(&runs[i].0.trajectory, &proto.camera, f_s, noise_stream(stages[i], k))
    });
    let mut per_stage: Vec<Vec<Observation>> = vec![Vec::with_capacity(proto.noise_seeds); stages.len()];
    for (&(i, _), obs) in jobs.iter().zip(observed) {
        per_stage[i].push(obs?);
    }

    let factors = |on: Stage, reference: Stage| -> Result<Option<FactorStats>> {
        let (Some(i), Some(j)) = (stages.iter().position(|s| *s == on), stages.iter().position(|s| *s == reference))
        else {
            return Ok(None);
        };
        let mut values = Vec::with_capacity(proto.noise_seeds);
        let mut floor_limited = 0;
        for (a, b) in per_stage[i].iter().zip(&per_stage[j]) {
            let e = enhancement_factor(&a.spectrum, &b.spectrum, f_s)?;
            floor_limited += e.floor_limited as usize;
            values.push(e.factor);
        }
        Ok(Some(FactorStats {
            median: median(&values),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            floor_limited,
        }))
    };
    let e_vs_a = factors(Stage::E, Stage::A)?;
    let e_vs_c = factors(Stage::E, Stage::C)?;
    let c_vs_a = factors(Stage::C, Stage::A)?;

    let period = TAU / drive.omega_s;
    let mut phase = None;
    let mut reports = Vec::with_capacity(stages.len());
    for ((stage, (run, stage_drive)), obs) in stages.iter().zip(runs).zip(per_stage) {
        let peaks: Vec<f64> = obs.iter().map(|o| o.peak).collect();
        let untuned = *stage == Stage::E && run.jumps.is_empty();
        if *stage == Stage::E && !untuned {
            phase = Some(phase_lock(&run.jumps, period));
        }
        reports.push(StageReport {
            stage: *stage,
            drive: stage_drive,
            observation: obs.into_iter().next().expect("noise_seeds ≥ 1"),
            median_peak: median(&peaks),
            peaks,
            jumps: run.jumps,
            untuned,
        });
    }
    Ok(VibresReport {
        detuning: drive.detuning(&p),
        region,
        fe_force: drive.fe_force,
        tune,
        stages: reports,
        e_vs_a,
        e_vs_c,
        c_vs_a,
        phase_lock: phase,
        noise_seeds: proto.noise_seeds,
        duration: proto.duration,
    })
}

/// Peak displacement amplitude of the signal alone, F_s/(mΩ²), in µm.
pub fn signal_displacement_um(p: &TrapParams, d: &DriveConfig) -> f64 {
    d.fs_force * p.axial_compliance() / MICROMETER
}
