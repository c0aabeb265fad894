use serde::{Deserialize, Serialize};

use super::{cubic, DuffingParams};
use crate::error::{Error, Result};

/// Detuning interval with three steady states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BistableRegion {
    /// Saddle-node of the upper branch (descending sweeps jump down here), rad/s.
    pub delta_lower: f64,
    /// Saddle-node of the lower branch (ascending sweeps jump up here), rad/s.
    pub delta_upper: f64,
    pub exists: bool,
}

impl BistableRegion {
    const NONE: BistableRegion =
        BistableRegion { delta_lower: f64::NAN, delta_upper: f64::NAN, exists: false };

    pub fn width(&self) -> f64 {
        if self.exists {
            self.delta_upper - self.delta_lower
        } else {
            0.0
        }
    }

    pub fn center(&self) -> Option<f64> {
        self.exists.then(|| 0.5 * (self.delta_lower + self.delta_upper))
    }

    pub fn contains(&self, delta: f64) -> bool {
        self.exists && delta > self.delta_lower && delta < self.delta_upper
    }
}

/// Detuning resolution of the boundary search, in units of γ.
const RESOLUTION: f64 = 1e-3;

/// Locates the three-root window by bisection on the sign of the cubic's discriminant.
pub fn bistable_region(f0_reduced: f64, gamma: f64, xi: f64) -> Result<BistableRegion> {
    if !(xi.is_finite() && xi > 0.0) {
        return Err(Error::Domain(format!("bistability needs ξ > 0, got {xi}")));
    }
    let params = DuffingParams::new(f0_reduced, gamma, xi)?;
    let f = params.scaled_drive();
    if f == 0.0 {
        return Ok(BistableRegion::NONE);
    }
    let three = |d: f64| cubic::has_three_real_roots(2.0 * d, d * d + 1.0, -f);

    // Between the two folds Δ(s) = s − F/(s² + 1) is decreasing; its steepest point
    // s = −1/√3 always maps inside the window when the window exists.
    let s_mid = -1.0 / 3f64.sqrt();
    let inside = s_mid - f / (s_mid * s_mid + 1.0);
    if !three(inside) {
        return Ok(BistableRegion::NONE);
    }
    let outside_left = s_mid - f - 1.0;
    let outside_right = 1.0;
    // scaled units: Δ/(γ/2), so a resolution of 1e-3·γ is 2e-3 here
    let tol = 2.0 * RESOLUTION;
    let lower = bisect(outside_left, inside, tol, &three);
    let upper = bisect(outside_right, inside, tol, &three);
    let g = params.half_gamma();
    Ok(BistableRegion { delta_lower: lower * g, delta_upper: upper * g, exists: true })
}

/// Boundary between `out` (predicate false) and `inn` (predicate true).
fn bisect(mut out: f64, mut inn: f64, tol: f64, pred: &impl Fn(f64) -> bool) -> f64 {
    while (out - inn).abs() > tol {
        let mid = 0.5 * (out + inn);
        if pred(mid) {
            inn = mid;
        } else {
            out = mid;
        }
    }
    0.5 * (out + inn)
}
