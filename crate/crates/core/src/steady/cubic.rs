//! Real roots of a monic cubic x³ + b x² + c x + d.

use std::f64::consts::TAU;

/// Up to three real roots in ascending order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RealRoots {
    roots: [f64; 3],
    len: usize,
}

impl RealRoots {
    pub fn as_slice(&self) -> &[f64] {
        &self.roots[..self.len]
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }
}

/// Discriminant sign test: true when the monic cubic has three distinct real roots.
pub fn has_three_real_roots(b: f64, c: f64, d: f64) -> bool {
    depressed_discriminant(b, c, d) < 0.0
}

/// (q/2)² + (p/3)³ of the depressed cubic; negative ⇔ three distinct real roots.
pub fn depressed_discriminant(b: f64, c: f64, d: f64) -> f64 {
    let (p, q) = depress(b, c, d);
    (0.5 * q).powi(2) + (p / 3.0).powi(3)
}

fn depress(b: f64, c: f64, d: f64) -> (f64, f64) {
    let p = c - b * b / 3.0;
    let q = 2.0 * b * b * b / 27.0 - b * c / 3.0 + d;
    (p, q)
}

#[inline]
fn eval(b: f64, c: f64, d: f64, x: f64) -> (f64, f64) {
    let f = ((x + b) * x + c) * x + d;
    let df = (3.0 * x + 2.0 * b) * x + c;
    (f, df)
}

fn polish(b: f64, c: f64, d: f64, mut x: f64) -> f64 {
    let (mut f, _) = eval(b, c, d, x);
    for _ in 0..8 {
        let (_, df) = eval(b, c, d, x);
        if df == 0.0 || f == 0.0 {
            break;
        }
        let next = x - f / df;
        let (fn_, _) = eval(b, c, d, next);
        if !(fn_.abs() < f.abs()) {
            break;
        }
        x = next;
        f = fn_;
    }
    x
}

/// Trigonometric / Cardano solution followed by Newton polishing of each root.
pub fn solve_monic(b: f64, c: f64, d: f64) -> RealRoots {
    let shift = b / 3.0;
    let (p, q) = depress(b, c, d);
    let disc = (0.5 * q).powi(2) + (p / 3.0).powi(3);
    let mut out = RealRoots { roots: [0.0; 3], len: 0 };
    if disc < 0.0 {
        // p < 0 here
        let r = (-p / 3.0).sqrt();
        let arg = (-0.5 * q / (r * r * r)).clamp(-1.0, 1.0);
        let phi = arg.acos();
        for k in 0..3 {
            let t = 2.0 * r * ((phi + TAU * k as f64) / 3.0).cos();
            out.roots[k] = polish(b, c, d, t - shift);
        }
        out.len = 3;
    } else {
        let a = -q.signum() * (0.5 * q.abs() + disc.sqrt()).cbrt();
        let t = if a == 0.0 { 0.0 } else { a - p / (3.0 * a) };
        out.roots[0] = polish(b, c, d, t - shift);
        out.len = 1;
    }
    out.roots[..out.len].sort_by(|x, y| x.total_cmp(y));
    out
}
