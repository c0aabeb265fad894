use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dynamics::{AxialSample, Trajectory};
use crate::error::{Error, Result};
use crate::io::{Cell, CsvTable};
use crate::units::MICROMETER;

/// Camera timing and localisation statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraConfig {
    /// Frames per second, Hz.
    pub frame_rate: f64,
    /// Exposure per frame, s. The rest of each frame period is dead time.
    pub exposure: f64,
    /// Detected photons per frame N.
    pub photons_per_frame: f64,
    /// Standard deviation σ₀ of the axial point-spread function, m.
    pub psf_sigma: f64,
    pub seed: u64,
}

impl Default for CameraConfig {
    /// 8 Hz, 100 ms exposure, N = 240, σ₀ = 1.64 µm.
    fn default() -> Self {
        Self { frame_rate: 8.0, exposure: 0.1, photons_per_frame: 240.0, psf_sigma: 1.64e-6, seed: 0 }
    }
}

impl CameraConfig {
    /// Localisation error per frame, σ₀/√N.
    pub fn noise_sigma(&self) -> f64 {
        self.psf_sigma / self.photons_per_frame.sqrt()
    }

    pub fn frame_period(&self) -> f64 {
        1.0 / self.frame_rate
    }

    pub fn noiseless(mut self) -> Self {
        self.psf_sigma = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.frame_rate.is_finite() && self.frame_rate > 0.0) {
            return Err(Error::param("frame_rate", "must be > 0"));
        }
        if !(self.exposure > 0.0 && self.exposure <= self.frame_period() * (1.0 + 1e-12)) {
            return Err(Error::param("exposure", "must be in (0, 1/frame_rate]"));
        }
        if !(self.photons_per_frame >= 1.0) {
            return Err(Error::param("photons_per_frame", "must be ≥ 1"));
        }
        if !(self.psf_sigma.is_finite() && self.psf_sigma >= 0.0) {
            return Err(Error::param("psf_sigma", "must be ≥ 0"));
        }
        Ok(())
    }

    /// Number of complete frames a trajectory spanning `span` seconds can provide.
    pub fn frames_in(&self, span: f64) -> usize {
        if span < self.exposure {
            return 0;
        }
        ((span - self.exposure) * self.frame_rate + 1e-9).floor() as usize + 1
    }
}

/// Camera frames: mid-exposure times and measured axial positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledTrace {
    pub times: Vec<f64>,
    /// Measured axial positions, m.
    pub z: Vec<f64>,
    /// Per-frame localisation sigma, m.
    pub sigma: Vec<f64>,
}

impl SampledTrace {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    /// The true axial positions at the trajectory's own sampling, without noise.
    pub fn exact<S: AxialSample>(traj: &Trajectory<S>) -> Self {
        Self {
            times: traj.states.iter().map(|s| s.time()).collect(),
            z: traj.states.iter().map(|s| s.axial()).collect(),
            sigma: vec![0.0; traj.states.len()],
        }
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["t_s", "z_um_measured"]);
        for (ti, zi) in self.times.iter().zip(&self.z) {
            t.row(&[Cell::Num(*ti), Cell::Num(zi / MICROMETER)]);
        }
        t
    }
}

/// Samples `frames` camera frames with the generator seeded from `cam.seed`.
pub fn sample_camera<S: AxialSample>(
    traj: &Trajectory<S>,
    cam: &CameraConfig,
    frames: usize,
) -> Result<SampledTrace> {
    let mut rng = ChaCha8Rng::seed_from_u64(cam.seed);
    sample_camera_with_rng(traj, cam, frames, &mut rng)
}

/// Each frame is the mean true z over its exposure window plus N(0, σ₀/√N) noise.
pub fn sample_camera_with_rng<S: AxialSample, R: rand::Rng>(
    traj: &Trajectory<S>,
    cam: &CameraConfig,
    frames: usize,
    rng: &mut R,
) -> Result<SampledTrace> {
    cam.validate()?;
    let states = &traj.states;
    if states.len() < 2 {
        return Err(Error::Input("trajectory has fewer than two samples".into()));
    }
    let h = traj.sample_interval();
    if h > cam.frame_period() / 10.0 * (1.0 + 1e-9) {
        return Err(Error::Input(format!(
            "trajectory sampling {h:e} s is coarser than a tenth of the frame period"
        )));
    }
    let t0 = states[0].time();
    let span = states[states.len() - 1].time() - t0;
    if frames > cam.frames_in(span) {
        return Err(Error::Range(format!(
            "trajectory of {span} s covers {} frames, {frames} requested",
            cam.frames_in(span)
        )));
    }
    let sigma = cam.noise_sigma();
    let noise = if sigma > 0.0 {
        Some(Normal::new(0.0, sigma).map_err(|e| Error::Domain(e.to_string()))?)
    } else {
        None
    };
    let index = |t: f64| ((t / h) - 1e-6).ceil().max(0.0) as usize;
    let mut out = SampledTrace {
        times: Vec::with_capacity(frames),
        z: Vec::with_capacity(frames),
        sigma: vec![sigma; frames],
    };
    for k in 0..frames {
        let start = k as f64 * cam.frame_period();
        let lo = index(start);
        let hi = index(start + cam.exposure).min(states.len());
        if hi <= lo {
            return Err(Error::Range(format!("frame {k} holds no samples")));
        }
        let mean = states[lo..hi].iter().map(AxialSample::axial).sum::<f64>() / (hi - lo) as f64;
        let n = noise.as_ref().map_or(0.0, |d| d.sample(rng));
        out.times.push(t0 + start + 0.5 * cam.exposure);
        out.z.push(mean + n);
    }
    Ok(out)
}
