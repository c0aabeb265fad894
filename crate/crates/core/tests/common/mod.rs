//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// Positive roots of u((ξu + Δ)² + g²) = f₀² found by a sign scan on a log grid
/// followed by bisection.
pub fn sign_scan_roots(delta: f64, f0: f64, gamma: f64, xi: f64, points: usize) -> Vec<f64> {
    let g = 0.5 * gamma;
    let poly = |u: f64| u * ((xi * u + delta).powi(2) + g * g) - f0 * f0;
    let u_hi = 1.01 * f0 * f0 / (g * g);
    let s_max = delta.abs() + xi * f0 * f0 / (g * g);
    let u_lo = 0.5 * f0 * f0 / (s_max * s_max + g * g);
    let ratio = (u_hi / u_lo).ln();
    let grid: Vec<f64> = (0..points).map(|k| u_lo * (ratio * k as f64 / (points - 1) as f64).exp()).collect();
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (mut a, mut b) = (w[0], w[1]);
        let (pa, pb) = (poly(a), poly(b));
        if pa == 0.0 {
            roots.push(a);
            continue;
        }
        if pa.signum() == pb.signum() {
            continue;
        }
        let sa = pa.signum();
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if poly(m).signum() == sa {
                a = m;
            } else {
                b = m;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

/// Largest growth rate (1/s) of a small perturbation about the steady state with
/// |α|² = u, from integrating the linearised envelope equation
/// α' = i(Δ + ξ|α|²)α + i f₀ − (γ/2)α with a finite-difference Jacobian.
pub fn perturbation_growth_rate(u: f64, delta: f64, f0: f64, gamma: f64, xi: f64) -> f64 {
    let g = 0.5 * gamma;
    // dimensionless: a = α√(ξ/g), τ = g t
    let d = delta / g;
    let sqrt_f = f0 * xi.sqrt() / g.powf(1.5);
    let v = xi * u / g;
    let s = d + v;
    // a₀ = i√F/(1 − iS)
    let den = 1.0 + s * s;
    let a0 = [-sqrt_f * s / den, sqrt_f / den];
    let rhs = |a: [f64; 2]| {
        let w = d + a[0] * a[0] + a[1] * a[1];
        [-w * a[1] - a[0], w * a[0] + sqrt_f - a[1]]
    };
    let h = 1e-7 * (a0[0].hypot(a0[1])).max(1e-12);
    let mut jac = [[0.0; 2]; 2];
    for k in 0..2 {
        let mut ap = a0;
        let mut am = a0;
        ap[k] += h;
        am[k] -= h;
        let (fp, fm) = (rhs(ap), rhs(am));
        jac[0][k] = (fp[0] - fm[0]) / (2.0 * h);
        jac[1][k] = (fp[1] - fm[1]) / (2.0 * h);
    }
    let lin = |x: [f64; 2]| [jac[0][0] * x[0] + jac[0][1] * x[1], jac[1][0] * x[0] + jac[1][1] * x[1]];
    let norm = jac.iter().flatten().map(|x| x.abs()).fold(1.0, f64::max);
    let dt = 0.05 / norm;
    let t_end = 60.0;
    let steps = (t_end / dt).ceil() as usize;
    let dt = t_end / steps as f64;
    let mut x = [0.6, 0.8];
    let mut log_scale = 0.0;
    let (mut early, mut late) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for k in 1..=steps {
        let k1 = lin(x);
        let k2 = lin([x[0] + 0.5 * dt * k1[0], x[1] + 0.5 * dt * k1[1]]);
        let k3 = lin([x[0] + 0.5 * dt * k2[0], x[1] + 0.5 * dt * k2[1]]);
        let k4 = lin([x[0] + dt * k3[0], x[1] + dt * k3[1]]);
        for i in 0..2 {
            x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let n = x[0].hypot(x[1]);
        log_scale += n.ln();
        x = [x[0] / n, x[1] / n];
        let t = k as f64 * dt;
        if (20.0..30.0).contains(&t) {
            early = early.max(log_scale);
        } else if t >= 50.0 {
            late = late.max(log_scale);
        }
    }
    g * (late - early) / 30.0
}

/// Relative distance |a − b|/max(|a|, |b|).
pub fn rel_diff(a: f64, b: f64) -> f64 {
    let s = a.abs().max(b.abs());
    if s == 0.0 {
        0.0
    } else {
        (a - b).abs() / s
    }
}
