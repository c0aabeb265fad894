use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use funnel_core::config::ParamFile;
use funnel_core::experiments::{
    center_on_window, default_fe_scan, run_sweep, tune_enhancement, SweepExperimentConfig, TUNE_DURATION,
};
use funnel_core::steady::bistable_region;
use funnel_core::units::{hz_to_rad, ZEPTONEWTON};
use funnel_core::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn tuning(c: &mut Criterion) {
    let cfg = ParamFile::default();
    let p = cfg.trap();
    let d = center_on_window(&p, &cfg.drive()).unwrap();
    let scan = default_fe_scan(&p, &d, 16).unwrap();
    let mut g = c.benchmark_group("tune_enhancement");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| tune_enhancement(&p, &d, &cfg.camera(), black_box(&scan), TUNE_DURATION, exec).unwrap())
        });
    }
    g.finish();
}

fn sweeps(c: &mut Criterion) {
    let p = ParamFile::default().trap();
    let drives = (1..=12).map(|k| 2.5 * k as f64 * ZEPTONEWTON).collect();
    let sc = SweepExperimentConfig::new(p, hz_to_rad(-40e3), hz_to_rad(3e3), p.damping / 20.0, drives);
    let mut g = c.benchmark_group("run_sweep");
    g.sample_size(10);
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| run_sweep(black_box(&sc), exec).unwrap())
        });
    }
    g.finish();
}

fn bistable_map(c: &mut Criterion) {
    let p = ParamFile::default().trap();
    let drives: Vec<f64> = (1..=600).map(|k| 0.05 * k as f64 * ZEPTONEWTON).collect();
    let mut g = c.benchmark_group("bistable_map");
    for (name, exec) in MODES {
        g.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| exec.map(black_box(&drives), |f| bistable_region(p.reduced_drive(*f), p.damping, p.xi())))
        });
    }
    g.finish();
}

criterion_group!(benches, tuning, sweeps, bistable_map);
criterion_main!(benches);
