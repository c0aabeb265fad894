//! Flat key-value parameter file.
//!
//! Frequencies in the file are ordinary frequencies in Hz, forces in zN, lengths in
//! metres unless the key says otherwise. Conversion to SI with angular frequencies
//! happens here and nowhere else.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::CameraConfig;
use crate::trap::{DriveConfig, TrapParams};
use crate::units::{hz_to_rad, ATOMIC_MASS_UNIT, MICROMETER, ZEPTONEWTON};

fn default_omega_y() -> f64 {
    1.15e6
}
fn default_frame_rate() -> f64 {
    8.0
}
fn default_exposure() -> f64 {
    0.1
}
fn default_photons() -> f64 {
    240.0
}
fn default_psf() -> f64 {
    1.64
}
fn default_record() -> f64 {
    120.0
}
fn default_noise_seeds() -> usize {
    50
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamFile {
    pub mass_u: f64,
    pub omega_x_hz: f64,
    #[serde(default = "default_omega_y")]
    pub omega_y_hz: f64,
    pub omega_z_hz: f64,
    pub funnel_length_m: f64,
    pub gamma_hz: f64,
    pub f0_zn: f64,
    pub detuning_hz: f64,
    pub fs_zn: f64,
    pub fs_hz: f64,
    pub fe_zn: f64,
    pub fe_hz: f64,
    pub seed: u64,
    #[serde(default = "default_frame_rate")]
    pub frame_rate_hz: f64,
    #[serde(default = "default_exposure")]
    pub exposure_s: f64,
    #[serde(default = "default_photons")]
    pub photons_per_frame: f64,
    #[serde(default = "default_psf")]
    pub psf_sigma_um: f64,
    #[serde(default = "default_record")]
    pub record_s: f64,
    #[serde(default = "default_noise_seeds")]
    pub noise_seeds: usize,
}

impl Default for ParamFile {
    /// The ⁴⁰Ca⁺ funnel-trap values with the 30 zN radial drive, the 1.2 zN / 0.5 Hz
    /// signal and the 50 Hz enhancement channel (amplitude left to tuning).
    fn default() -> Self {
        Self {
            mass_u: 40.0,
            omega_x_hz: 1.14e6,
            omega_y_hz: default_omega_y(),
            omega_z_hz: 100e3,
            funnel_length_m: 1.81e-3,
            gamma_hz: 250.0,
            f0_zn: 30.0,
            detuning_hz: -5e3,
            fs_zn: 1.2,
            fs_hz: 0.5,
            fe_zn: 0.0,
            fe_hz: 50.0,
            seed: 1,
            frame_rate_hz: default_frame_rate(),
            exposure_s: default_exposure(),
            photons_per_frame: default_photons(),
            psf_sigma_um: default_psf(),
            record_s: default_record(),
            noise_seeds: default_noise_seeds(),
        }
    }
}

impl ParamFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ParamFile = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat numeric table always serialises")
    }

    pub fn trap(&self) -> TrapParams {
        TrapParams {
            mass: self.mass_u * ATOMIC_MASS_UNIT,
            omega_x: hz_to_rad(self.omega_x_hz),
            omega_y: hz_to_rad(self.omega_y_hz),
            omega_z: hz_to_rad(self.omega_z_hz),
            funnel_length: self.funnel_length_m,
            damping: hz_to_rad(self.gamma_hz),
        }
    }

    pub fn drive(&self) -> DriveConfig {
        let p = self.trap();
        DriveConfig {
            f0_force: self.f0_zn * ZEPTONEWTON,
            omega_0: p.omega_x + hz_to_rad(self.detuning_hz),
            fs_force: self.fs_zn * ZEPTONEWTON,
            omega_s: hz_to_rad(self.fs_hz),
            fe_force: self.fe_zn * ZEPTONEWTON,
            omega_e: hz_to_rad(self.fe_hz),
        }
    }

    pub fn camera(&self) -> CameraConfig {
        CameraConfig {
            frame_rate: self.frame_rate_hz,
            exposure: self.exposure_s,
            photons_per_frame: self.photons_per_frame,
            psf_sigma: self.psf_sigma_um * MICROMETER,
            seed: self.seed,
        }
    }

    /// Validates all derived parameter sets, reporting failures by file key.
    pub fn validate(&self) -> Result<()> {
        let rename = |e: Error| match e {
            Error::Parameter { name, reason } => Error::Parameter { name: file_key(name), reason },
            other => other,
        };
        self.trap().validate().map_err(rename)?;
        self.drive().validate().map_err(rename)?;
        self.camera().validate().map_err(rename)?;
        if !(self.record_s > 0.0) {
            return Err(Error::param("record_s", "must be > 0"));
        }
        if self.noise_seeds == 0 {
            return Err(Error::param("noise_seeds", "must be ≥ 1"));
        }
        Ok(())
    }
}

fn file_key(name: &'static str) -> &'static str {
    match name {
        "mass" => "mass_u",
        "omega_x" => "omega_x_hz",
        "omega_y" => "omega_y_hz",
        "omega_z" => "omega_z_hz",
        "funnel_length" => "funnel_length_m",
        "damping" => "gamma_hz",
        "f0_force" => "f0_zn",
        "omega_0" => "detuning_hz",
        "fs_force" => "fs_zn",
        "omega_s" => "fs_hz",
        "fe_force" => "fe_zn",
        "omega_e" => "fe_hz",
        "frame_rate" => "frame_rate_hz",
        "exposure" => "exposure_s",
        "psf_sigma" => "psf_sigma_um",
        other => other,
    }
}
