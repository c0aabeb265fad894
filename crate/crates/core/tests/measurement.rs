use std::f64::consts::TAU;

use funnel_core::experiments::{observe, simulate_quasi_static, stage_sample_interval, Preparation, Stage};
use funnel_core::measurement::{amplitude_spectrum, peak_amplitude, CameraConfig, SampledTrace};
use funnel_core::trap::DriveConfig;
use funnel_core::units::ZEPTONEWTON;
use funnel_core::TrapParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn trace(z: Vec<f64>, dt: f64) -> SampledTrace {
    let n = z.len();
    SampledTrace { times: (0..n).map(|k| k as f64 * dt).collect(), z, sigma: vec![0.0; n] }
}

/// Hann-windowed single-sided amplitudes by direct summation.
fn direct_dft(z: &[f64]) -> Vec<f64> {
    let n = z.len();
    let mean = z.iter().sum::<f64>() / n as f64;
    let w: Vec<f64> = (0..n).map(|k| 0.5 - 0.5 * (TAU * k as f64 / n as f64).cos()).collect();
    let sum_w: f64 = w.iter().sum();
    (0..=n / 2)
        .map(|k| {
            let (mut re, mut im) = (0.0, 0.0);
            for (j, (x, wj)) in z.iter().zip(&w).enumerate() {
                let phi = TAU * (k * j % n) as f64 / n as f64;
                re += (x - mean) * wj * phi.cos();
                im -= (x - mean) * wj * phi.sin();
            }
            let scale = if k == 0 || (n % 2 == 0 && k == n / 2) { 1.0 } else { 2.0 };
            scale * re.hypot(im) / sum_w
        })
        .collect()
}

#[test]
fn spectrum_matches_direct_dft() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let normal = Normal::new(0.0, 1e-7).unwrap();
    for n in [512, 333] {
        let z: Vec<f64> = (0..n).map(|k| 3e-8 * (TAU * 0.7 * k as f64 / 8.0).sin() + normal.sample(&mut rng)).collect();
        let spec = amplitude_spectrum(&trace(z.clone(), 0.125)).unwrap();
        for (a, b) in spec.amplitudes.iter().zip(direct_dft(&z)) {
            assert!((a - b).abs() <= 1e-9 * b.max(1e-12) + 1e-20);
        }
    }
}

#[test]
fn bin_centred_tone_reads_its_amplitude() {
    let n = 1024;
    let dt = 0.125;
    let f = 37.0 / (n as f64 * dt);
    let z: Vec<f64> = (0..n).map(|k| 45e-9 * (TAU * f * k as f64 * dt + 0.4).cos()).collect();
    let spec = amplitude_spectrum(&trace(z, dt)).unwrap();
    assert!((peak_amplitude(&spec, f).unwrap() / 45e-9 - 1.0).abs() < 1e-9);
}

#[test]
fn white_noise_floor_over_seeds() {
    let cam = CameraConfig::default();
    let sigma = cam.noise_sigma();
    assert!((sigma / 105.9e-9 - 1.0).abs() < 1e-3);
    let n = 512;
    let expected_rms = sigma * (6.0 / n as f64).sqrt();
    let mut mean_sq = 0.0;
    let mut count = 0;
    for seed in 0..50u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, sigma).unwrap();
        let z: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let spec = amplitude_spectrum(&trace(z, cam.frame_period())).unwrap();
        for a in &spec.amplitudes[2..n / 2] {
            mean_sq += a * a;
            count += 1;
        }
    }
    let rms = (mean_sq / count as f64).sqrt();
    assert!((rms / expected_rms - 1.0).abs() < 0.2, "{rms:e} vs {expected_rms:e}");
}

#[test]
fn camera_noise_has_configured_sigma() {
    let p = TrapParams::default();
    let d = DriveConfig::radial(&p, 0.0, 0.0);
    let cam = CameraConfig::default();
    let run = simulate_quasi_static(&p, &d, 200.0, stage_sample_interval(&d, &cam), Preparation::Lower).unwrap();
    let obs = observe(&run.trajectory, &cam, 0.5, 3).unwrap();
    let n = obs.trace.len() as f64;
    let mean = obs.trace.z.iter().sum::<f64>() / n;
    let sd = (obs.trace.z.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    assert!((sd / cam.noise_sigma() - 1.0).abs() < 0.05);
    assert!((obs.spectrum.mean_square() / sd.powi(2) - 1.0).abs() < 0.05);
}

#[test]
fn noise_only_peak_sits_at_the_floor() {
    let p = TrapParams::default();
    let d = Stage::A.drive(&DriveConfig { fs_force: 0.0, omega_s: TAU * 0.5, ..DriveConfig::radial(&p, 30.0 * ZEPTONEWTON, 0.0) });
    let cam = CameraConfig::default();
    let run = simulate_quasi_static(&p, &d, 120.0, stage_sample_interval(&d, &cam), Preparation::Lower).unwrap();
    let (mut above, mut ratio_sum) = (0, 0.0);
    for seed in 0..50 {
        let obs = observe(&run.trajectory, &cam, 0.5, seed).unwrap();
        let r = obs.peak / obs.spectrum.noise_floor(0.5);
        ratio_sum += r;
        above += usize::from(r > 4.0);
    }
    assert!(above <= 2, "{above} of 50 noise-only records show a peak");
    assert!(ratio_sum / 50.0 < 2.5);
}

#[test]
fn frame_averages_the_exposure() {
    let p = TrapParams::default();
    let d = DriveConfig { fs_force: 1.2 * ZEPTONEWTON, omega_s: TAU * 0.5, ..DriveConfig::radial(&p, 0.0, 0.0) };
    let cam = CameraConfig::default().noiseless();
    let run = simulate_quasi_static(&p, &d, 60.0, 1e-3, Preparation::Lower).unwrap();
    let obs = observe(&run.trajectory, &cam, 0.5, 0).unwrap();
    let z_amp = 1.2 * ZEPTONEWTON / (p.mass * p.omega_z.powi(2));
    let x = 0.5 * TAU * cam.exposure / 2.0;
    let boxcar = z_amp * x.sin() / x;
    for (t, z) in obs.trace.times.iter().zip(&obs.trace.z) {
        let want = boxcar * (TAU * 0.5 * t).cos();
        assert!((z - want).abs() < 1e-2 * z_amp, "t = {t}: {z} vs {want}");
    }
}
