use std::f64::consts::TAU;

use funnel_core::dynamics::{
    dwell_average, full_hamiltonian, integrate_envelope, integrate_full, EnvelopeState, FullState,
    IntegratorSettings,
};
use funnel_core::steady::steady_state_roots;
use funnel_core::trap::{equilibrium_displacement, DriveConfig, TrapParams};
use funnel_core::units::{hz_to_rad, ZEPTONEWTON};

#[test]
fn undamped_full_model_conserves_energy() {
    let p = TrapParams { damping: 1e-9, ..TrapParams::default() };
    // ω₀ = 0 makes the drive a static force
    let d = DriveConfig { omega_0: 0.0, ..DriveConfig::radial(&p, 20.0 * ZEPTONEWTON, 0.0) };
    let s0 = FullState { x: 2e-6, px: 0.0, z: 0.3e-6, pz: 0.0, t: 0.0 };
    let period = TAU / p.omega_x;
    let tr = integrate_full(s0, &p, &d, 2000.0 * period, IntegratorSettings::new(period / 512.0).with_stride(512))
        .unwrap();
    let h0 = full_hamiltonian(&s0, &p, &d);
    let scale = 0.5 * p.mass * p.omega_x.powi(2) * s0.x * s0.x;
    let drift = tr.states.iter().map(|s| (full_hamiltonian(s, &p, &d) - h0).abs()).fold(0.0, f64::max) / scale;
    assert!(drift < 1e-6, "relative energy drift {drift:e}");
}

#[test]
fn envelope_converges_at_fourth_order() {
    let p = TrapParams::default();
    let d = DriveConfig::radial(&p, 20.0 * ZEPTONEWTON, hz_to_rad(-8e3));
    let t_end = 2e-3;
    let base = TAU / (64.0 * p.omega_z);
    let end = |dt: f64| *integrate_envelope(EnvelopeState::default(), &p, &d, t_end, IntegratorSettings::new(dt))
        .unwrap()
        .last();
    let (a, b, c) = (end(base), end(base / 2.0), end(base / 4.0));
    let err = |x: &EnvelopeState, y: &EnvelopeState| (x.alpha_re - y.alpha_re).hypot(x.alpha_im - y.alpha_im);
    let ratio = err(&a, &b) / err(&b, &c);
    assert!(ratio > 10.0 && ratio < 24.0, "error ratio {ratio}");
}

#[test]
fn envelope_settles_on_the_steady_state() {
    let p = TrapParams::default();
    for hz in [-40e3, -500.0, 2e3] {
        let d = DriveConfig::radial(&p, 30.0 * ZEPTONEWTON, hz_to_rad(hz));
        let roots = steady_state_roots(hz_to_rad(hz), p.reduced_drive(d.f0_force), p.damping, p.xi()).unwrap();
        assert_eq!(roots.len(), 1);
        let avg = dwell_average(EnvelopeState::default(), &p, &d, 30.0 / p.damping, TAU / (64.0 * p.omega_z)).unwrap();
        let u = roots[0].u;
        assert!((avg.end.alpha_sq() / u - 1.0).abs() < 1e-3, "{hz} Hz: {} vs {u}", avg.end.alpha_sq());
        let z = equilibrium_displacement(&p, u, 0.0);
        assert!((avg.mean_z / z - 1.0).abs() < 1e-3);
    }
}

#[test]
fn envelope_magnitude_ignores_time_origin() {
    let p = TrapParams::default();
    let d = DriveConfig::radial(&p, 10.0 * ZEPTONEWTON, hz_to_rad(-3e3));
    let dt = TAU / (64.0 * p.omega_z);
    let run = |t0: f64| {
        let s0 = EnvelopeState { t: t0, ..EnvelopeState::default() };
        integrate_envelope(s0, &p, &d, 1e-3, IntegratorSettings::new(dt).with_stride(64)).unwrap()
    };
    let (a, b) = (run(0.0), run(0.37e-3));
    for (x, y) in a.states.iter().zip(&b.states) {
        assert!((x.alpha_abs() - y.alpha_abs()).abs() <= 1e-9 * x.alpha_abs().max(1e-12));
        assert!((x.z - y.z).abs() <= 1e-9 * x.z.abs().max(1e-15));
    }
}

#[test]
fn full_and_envelope_agree_off_resonance() {
    let p = TrapParams::default();
    let d = DriveConfig::radial(&p, 10.0 * ZEPTONEWTON, hz_to_rad(-20e3));
    let t_end = 5e-3;
    let full = integrate_full(
        FullState::default(),
        &p,
        &d,
        t_end,
        IntegratorSettings::new(TAU / (256.0 * p.omega_x)).with_stride(1),
    )
    .unwrap();
    let env = *integrate_envelope(EnvelopeState::default(), &p, &d, t_end, IntegratorSettings::new(TAU / (64.0 * p.omega_z)))
        .unwrap()
        .last();
    let tail = &full.states[full.states.len() - 2048..];
    let x_max = tail.iter().map(|s| s.x.abs()).fold(0.0, f64::max);
    assert!((x_max / (2.0 * env.alpha_abs()) - 1.0).abs() < 0.05, "{x_max} vs {}", 2.0 * env.alpha_abs());
}

#[test]
fn full_model_mean_axial_position_follows_static_response() {
    let p = TrapParams::default();
    let d = DriveConfig::radial(&p, 10.0 * ZEPTONEWTON, hz_to_rad(1e3));
    let dt = TAU / (256.0 * p.omega_x);
    let tr = integrate_full(FullState::default(), &p, &d, 20e-3, IntegratorSettings::new(dt)).unwrap();
    let window = (20.0 * TAU / p.omega_z / dt).round() as usize;
    let tail = &tr.states[tr.states.len() - window..];
    let n = tail.len() as f64;
    let mean_x2 = tail.iter().map(|s| s.x * s.x).sum::<f64>() / n;
    let mean_z = tail.iter().map(|s| s.z).sum::<f64>() / n;
    let z0 = equilibrium_displacement(&p, 0.5 * mean_x2, 0.0);
    assert!((mean_z / z0 - 1.0).abs() < 0.05, "{mean_z:e} vs {z0:e}");
}
