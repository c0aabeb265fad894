//! Camera-rate measurement records and their spectral analysis.

mod camera;
mod spectrum;

pub use camera::{sample_camera, sample_camera_with_rng, CameraConfig, SampledTrace};
pub use spectrum::{
    amplitude_spectrum, enhancement_factor, peak_amplitude, Enhancement, SpectrumRecord, Window,
};
