use std::f64::consts::TAU;
use std::path::{Path, PathBuf};
use std::time::Instant;

use funnel_core::config::ParamFile;
use funnel_core::dynamics::{integrate_envelope, integrate_full, EnvelopeState, FullState, IntegratorSettings};
use funnel_core::experiments::{
    run_sweep, run_vibres, write_sweep_bundle, write_vibres_bundle, Directions, Enhancement, Stage,
    SweepExperimentConfig, SweepModel, VibresProtocol,
};
use funnel_core::io::{Cell, CsvTable};
use funnel_core::steady::{bistable_region, steady_state_roots, Branch, DuffingParams};
use funnel_core::trap::equilibrium_displacement;
use funnel_core::units::{hz_to_rad, rad_to_hz, MICROMETER, ZEPTONEWTON};
use funnel_core::Execution;

use crate::manifest::{Invocation, RunManifest};
use crate::{
    Cli, Command, DirectionArg, IntegrateArgs, MapArgs, ModelArg, SteadyArgs, SweepArgs, SweepModelArg, VibresArgs,
};

pub fn dispatch(cli: &Cli) -> anyhow::Result<()> {
    let exec = if cli.sequential { Execution::Sequential } else { Execution::Parallel };
    let (invocation, mut cfg, sequential) = match &cli.command {
        Command::Replay(r) => {
            let m = RunManifest::load(&r.manifest)?;
            let mut cfg = m.config;
            cfg.seed = m.seed;
            (m.command, cfg, m.sequential)
        }
        other => {
            let cfg = match &cli.config {
                Some(path) => ParamFile::load(path)?,
                None => ParamFile::default(),
            };
            let inv = match other {
                Command::Steady(a) => Invocation::Steady(a.clone()),
                Command::Sweep(a) => Invocation::Sweep(a.clone()),
                Command::Vibres(a) => Invocation::Vibres(a.clone()),
                Command::Integrate(a) => Invocation::Integrate(a.clone()),
                Command::BistableMap(a) => Invocation::BistableMap(a.clone()),
                Command::Replay(_) => unreachable!(),
            };
            (inv, cfg, cli.sequential)
        }
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    let exec = if sequential { Execution::Sequential } else { exec };
    run(&invocation, &cfg, &cli.out, exec, sequential)
}

fn run(inv: &Invocation, cfg: &ParamFile, out: &Path, exec: Execution, sequential: bool) -> anyhow::Result<()> {
    std::fs::create_dir_all(out)?;
    let start = Instant::now();
    let files = match inv {
        Invocation::Steady(a) => steady(a, cfg, out)?,
        Invocation::Sweep(a) => sweep(a, cfg, out, exec)?,
        Invocation::Vibres(a) => vibres(a, cfg, out, exec)?,
        Invocation::Integrate(a) => integrate(a, cfg, out)?,
        Invocation::BistableMap(a) => bistable_map(a, cfg, out, exec)?,
    };
    let outputs = files
        .iter()
        .map(|p| p.strip_prefix(out).unwrap_or(p).display().to_string())
        .collect();
    let manifest = RunManifest {
        command: inv.clone(),
        config: cfg.clone(),
        seed: cfg.seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        sequential,
        outputs,
        wall_clock_s: start.elapsed().as_secs_f64(),
    };
    manifest.write(out)?;
    log::info!("{} finished in {:.2} s", inv.name(), manifest.wall_clock_s);
    Ok(())
}

fn write(out: &Path, name: &str, t: &CsvTable) -> anyhow::Result<PathBuf> {
    let path = out.join(name);
    t.write(&path)?;
    Ok(path)
}

fn steady(a: &SteadyArgs, cfg: &ParamFile, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let p = cfg.trap();
    let d = cfg.drive();
    let f0 = p.reduced_drive(d.f0_force);
    let detunings = if a.detuning_hz.is_empty() { vec![cfg.detuning_hz] } else { a.detuning_hz.clone() };
    let params = DuffingParams::new(f0, p.damping, p.xi())?;
    let mut t = CsvTable::new(&[
        "detuning_hz",
        "root",
        "u_m2",
        "amplitude_um",
        "stability",
        "branch",
        "eig1_re",
        "eig1_im",
        "eig2_re",
        "eig2_im",
        "z0_um",
    ]);
    t.meta("f0_zn", cfg.f0_zn).meta("xi_rad_s_m2", p.xi());
    for &hz in &detunings {
        let delta = hz_to_rad(hz);
        for (i, r) in steady_state_roots(delta, f0, p.damping, p.xi())?.iter().enumerate() {
            let stability = if r.is_stable() { "stable" } else { "unstable" };
            let branch = Branch::of(r.u, delta, &params);
            t.row(&[
                Cell::Num(hz),
                Cell::Int(i as i64),
                Cell::Num(r.u),
                Cell::Num(r.amplitude / MICROMETER),
                Cell::Text(stability),
                Cell::Text(branch.as_str()),
                Cell::Num(r.jacobian_eigs[0].re),
                Cell::Num(r.jacobian_eigs[0].im),
                Cell::Num(r.jacobian_eigs[1].re),
                Cell::Num(r.jacobian_eigs[1].im),
                Cell::Num(equilibrium_displacement(&p, r.u, 0.0) / MICROMETER),
            ]);
        }
    }
    Ok(vec![write(out, "steady.csv", &t)?])
}

fn sweep(a: &SweepArgs, cfg: &ParamFile, out: &Path, exec: Execution) -> anyhow::Result<Vec<PathBuf>> {
    let p = cfg.trap();
    let drives = if a.drives_zn.is_empty() { vec![cfg.f0_zn] } else { a.drives_zn.clone() };
    let step = a.step_hz.map_or(p.damping / 20.0, hz_to_rad);
    let mut sc = SweepExperimentConfig::new(
        p,
        hz_to_rad(a.from_hz),
        hz_to_rad(a.to_hz),
        step,
        drives.iter().map(|f| f * ZEPTONEWTON).collect(),
    );
    sc.directions = match a.direction {
        DirectionArg::Ascending => Directions::Ascending,
        DirectionArg::Descending => Directions::Descending,
        DirectionArg::Both => Directions::Both,
    };
    if let Some(dw) = a.dwell_s {
        sc.dwell = dw;
    }
    if a.model == SweepModelArg::Envelope {
        sc.model = SweepModel::envelope(&p);
    }
    let result = run_sweep(&sc, exec)?;
    Ok(write_sweep_bundle(out, &cfg.to_toml_string(), &result)?)
}

fn vibres(a: &VibresArgs, cfg: &ParamFile, out: &Path, exec: Execution) -> anyhow::Result<Vec<PathBuf>> {
    let mut proto = VibresProtocol::new(cfg.trap(), cfg.drive(), cfg.camera());
    proto.duration = cfg.record_s;
    proto.noise_seeds = cfg.noise_seeds;
    proto.center = !a.keep_detuning;
    proto.stages = a.stages.iter().map(|s| s.trim().parse::<Stage>()).collect::<Result<_, _>>()?;
    if a.fixed_fe {
        proto.enhancement = Enhancement::Fixed;
    } else if let Enhancement::Tune { duration, .. } = proto.enhancement {
        proto.enhancement = Enhancement::Tune { points: a.tune_points, duration };
    }
    let report = run_vibres(&proto, exec)?;
    if let Some(f) = report.e_vs_a {
        log::info!("stage e vs a: median factor {:.2}", f.median);
    }
    Ok(write_vibres_bundle(out, &cfg.to_toml_string(), &report)?)
}

fn integrate(a: &IntegrateArgs, cfg: &ParamFile, out: &Path) -> anyhow::Result<Vec<PathBuf>> {
    let p = cfg.trap();
    let d = cfg.drive();
    let (table, name) = match a.model {
        ModelArg::Full => {
            let dt = a.dt_s.unwrap_or(TAU / (256.0 * p.omega_x));
            let stride = a.stride.map_or(256, |s| s as usize);
            let tr = integrate_full(FullState::default(), &p, &d, a.duration_s, IntegratorSettings::new(dt).with_stride(stride))?;
            (tr.to_csv(), "trajectory_full.csv")
        }
        ModelArg::Envelope => {
            let dt = a.dt_s.unwrap_or(TAU / (64.0 * p.omega_z));
            let stride = a.stride.map_or(64, |s| s as usize);
            let tr = integrate_envelope(
                EnvelopeState::default(),
                &p,
                &d,
                a.duration_s,
                IntegratorSettings::new(dt).with_stride(stride),
            )?;
            (tr.to_csv(), "trajectory_envelope.csv")
        }
    };
    Ok(vec![write(out, name, &table)?])
}

fn bistable_map(a: &MapArgs, cfg: &ParamFile, out: &Path, exec: Execution) -> anyhow::Result<Vec<PathBuf>> {
    let p = cfg.trap();
    let drives: Vec<f64> =
        if a.drives_zn.is_empty() { (1..=60).map(|k| 0.5 * k as f64).collect() } else { a.drives_zn.clone() };
    let regions = exec.map(&drives, |f| bistable_region(p.reduced_drive(f * ZEPTONEWTON), p.damping, p.xi()));
    let mut t = CsvTable::new(&["f0_zn", "bistable", "lower_hz", "upper_hz", "width_hz"]);
    for (f, r) in drives.iter().zip(regions) {
        let r = r?;
        let (lo, hi) = if r.exists { (rad_to_hz(r.delta_lower), rad_to_hz(r.delta_upper)) } else { (f64::NAN, f64::NAN) };
        t.row(&[Cell::Num(*f), Cell::Bool(r.exists), Cell::Num(lo), Cell::Num(hi), Cell::Num(rad_to_hz(r.width()))]);
    }
    Ok(vec![write(out, "bistable_map.csv", &t)?])
}
