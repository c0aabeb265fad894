//! End-to-end protocols: detuning sweeps with jump extraction and the three-stage
//! amplification of a weak axial signal.

mod bundle;
mod sweep;
mod vibres;

pub use bundle::{write_sweep_bundle, write_vibres_bundle};
pub use sweep::{
    extract_jumps, run_sweep, Direction, Directions, DriveSweep, SweepExperimentConfig, SweepModel, SweepResult,
    SweepTrace, JUMP_THRESHOLD_FACTOR, REFERENCE_DRIVE_FRACTION,
};
pub use vibres::{
    center_on_window, circular_std, default_fe_scan, median, observe, operating_window, phase_lock,
    run_vibres, run_vibres_stage, signal_displacement_um, simulate_quasi_static, stage_sample_interval,
    tune_enhancement, Enhancement, FactorStats, Observation, PhaseLock, Preparation, QuasiStaticRun,
    QuasiStaticSample, Stage, StageOutcome, StageReport, TunePoint, TuneResult, VibresProtocol, VibresReport,
    VibresStageConfig, SAMPLES_PER_ENHANCEMENT_PERIOD, TUNE_DURATION,
};
