//! Writers for experiment bundle directories.

use std::path::{Path, PathBuf};

use serde::Serialize;

use super::sweep::{Direction, SweepResult};
use super::vibres::{FactorStats, PhaseLock, VibresReport};
use crate::error::{Error, Result};
use crate::io::CsvTable;
use crate::units::{rad_to_hz, MICROMETER, ZEPTONEWTON};

fn write_text(dir: &Path, name: &str, text: &str, out: &mut Vec<PathBuf>) -> Result<()> {
    let path = dir.join(name);
    std::fs::write(&path, text)?;
    out.push(path);
    Ok(())
}

fn write_csv(dir: &Path, name: &str, t: &CsvTable, out: &mut Vec<PathBuf>) -> Result<()> {
    write_text(dir, name, &t.render(), out)
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Serialize)]
struct StageSummary {
    stage: &'static str,
    f0_zn: f64,
    fs_zn: f64,
    fe_zn: f64,
    median_peak_um: f64,
    first_seed_peak_um: f64,
    noise_floor_um: f64,
    jump_count: usize,
    untuned: bool,
}

#[derive(Serialize)]
struct VibresSummary {
    detuning_hz: f64,
    bistable_lower_hz: f64,
    bistable_upper_hz: f64,
    fe_zn: f64,
    tuned: bool,
    tune_best_factor: Option<f64>,
    tune_curve_min: Option<f64>,
    tune_curve_max: Option<f64>,
    noise_seeds: usize,
    record_s: f64,
    stages: Vec<StageSummary>,
    enhancement_e_vs_a: Option<FactorStats>,
    enhancement_e_vs_c: Option<FactorStats>,
    enhancement_c_vs_a: Option<FactorStats>,
    phase_lock: Option<PhaseLock>,
}

/// Writes config.toml, per-stage trace and spectrum CSVs, the tuning curve and
/// summary.json into `dir`. Returns the written paths in order.
pub fn write_vibres_bundle(dir: &Path, config_toml: &str, report: &VibresReport) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    write_text(dir, "config.toml", config_toml, &mut out)?;
    let f_s = report.stages.first().map_or(0.0, |s| s.drive.omega_s / std::f64::consts::TAU);
    let mut stages = Vec::new();
    for s in &report.stages {
        let name = s.stage.as_str();
        write_csv(dir, &format!("trace_{name}.csv"), &s.observation.trace.to_csv(), &mut out)?;
        write_csv(dir, &format!("spectrum_{name}.csv"), &s.observation.spectrum.to_csv(), &mut out)?;
        stages.push(StageSummary {
            stage: name,
            f0_zn: s.drive.f0_force / ZEPTONEWTON,
            fs_zn: s.drive.fs_force / ZEPTONEWTON,
            fe_zn: s.drive.fe_force / ZEPTONEWTON,
            median_peak_um: s.median_peak / MICROMETER,
            first_seed_peak_um: s.observation.peak / MICROMETER,
            noise_floor_um: s.observation.spectrum.noise_floor(f_s) / MICROMETER,
            jump_count: s.jumps.len(),
            untuned: s.untuned,
        });
    }
    if let Some(t) = &report.tune {
        write_csv(dir, "tune_curve.csv", &t.to_csv(), &mut out)?;
    }
    let curve = report.tune.as_ref().map(|t| t.curve.iter().map(|c| c.factor).collect::<Vec<_>>());
    let summary = VibresSummary {
        detuning_hz: rad_to_hz(report.detuning),
        bistable_lower_hz: rad_to_hz(report.region.delta_lower),
        bistable_upper_hz: rad_to_hz(report.region.delta_upper),
        fe_zn: report.fe_force / ZEPTONEWTON,
        tuned: report.tune.is_some(),
        tune_best_factor: report.tune.as_ref().map(|t| t.best_factor),
        tune_curve_min: curve.as_ref().map(|c| c.iter().copied().fold(f64::INFINITY, f64::min)),
        tune_curve_max: curve.as_ref().map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        noise_seeds: report.noise_seeds,
        record_s: report.duration,
        stages,
        enhancement_e_vs_a: report.e_vs_a,
        enhancement_e_vs_c: report.e_vs_c,
        enhancement_c_vs_a: report.c_vs_a,
        phase_lock: report.phase_lock,
    };
    write_text(dir, "summary.json", &to_json(&summary)?, &mut out)?;
    Ok(out)
}

#[derive(Serialize)]
struct DriveSummary {
    f0_zn: f64,
    bistable: bool,
    bistable_lower_hz: f64,
    bistable_upper_hz: f64,
    ascending_jumps_hz: Vec<f64>,
    descending_jumps_hz: Vec<f64>,
    hysteresis_width_hz: f64,
}

#[derive(Serialize)]
struct SweepSummary {
    threshold: f64,
    drives: Vec<DriveSummary>,
}

/// Writes config.toml, one CSV per drive and direction, jumps.csv and summary.json.
pub fn write_sweep_bundle(dir: &Path, config_toml: &str, result: &SweepResult) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut out = Vec::new();
    write_text(dir, "config.toml", config_toml, &mut out)?;
    let mut drives = Vec::new();
    for (i, d) in result.drives.iter().enumerate() {
        for tr in &d.traces {
            let mut t = tr.to_csv();
            t.meta("f0_zn", d.f0_force / ZEPTONEWTON);
            write_csv(dir, &format!("sweep_{i:02}_{}.csv", tr.direction.as_str()), &t, &mut out)?;
        }
        let hz = |dir: Direction| {
            d.trace(dir).map_or_else(Vec::new, |t| t.jumps.iter().map(|j| rad_to_hz(*j)).collect())
        };
        drives.push(DriveSummary {
            f0_zn: d.f0_force / ZEPTONEWTON,
            bistable: d.region.exists,
            bistable_lower_hz: rad_to_hz(d.region.delta_lower),
            bistable_upper_hz: rad_to_hz(d.region.delta_upper),
            ascending_jumps_hz: hz(Direction::Ascending),
            descending_jumps_hz: hz(Direction::Descending),
            hysteresis_width_hz: rad_to_hz(d.hysteresis_width()),
        });
    }
    write_csv(dir, "jumps.csv", &result.jumps_csv(), &mut out)?;
    let summary = SweepSummary { threshold: result.threshold, drives };
    write_text(dir, "summary.json", &to_json(&summary)?, &mut out)?;
    Ok(out)
}
