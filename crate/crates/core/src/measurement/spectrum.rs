use std::f64::consts::TAU;

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use super::SampledTrace;
use crate::error::{Error, Result};
use crate::io::{Cell, CsvTable};
use crate::units::MICROMETER;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Window {
    Hann,
}

impl Window {
    /// Periodic window coefficients.
    fn coefficients(self, n: usize) -> Vec<f64> {
        match self {
            Window::Hann => (0..n).map(|k| 0.5 - 0.5 * (TAU * k as f64 / n as f64).cos()).collect(),
        }
    }
}

/// Single-sided amplitude spectrum, calibrated so a bin-centred tone of amplitude A reads A.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRecord {
    pub freqs: Vec<f64>,
    /// Amplitudes, m.
    pub amplitudes: Vec<f64>,
    /// Record duration N·Δt, s.
    pub duration: f64,
    pub samples: usize,
    pub window: Window,
    /// Equivalent noise bandwidth of the window, in bins.
    pub enbw: f64,
}

impl SpectrumRecord {
    pub fn bin_spacing(&self) -> f64 {
        1.0 / self.duration
    }

    pub fn nearest_bin(&self, f: f64) -> usize {
        ((f * self.duration).round().max(0.0) as usize).min(self.freqs.len() - 1)
    }

    /// Mean-square of the (mean-removed) signal recovered from the spectrum.
    pub fn mean_square(&self) -> f64 {
        let last = self.amplitudes.len() - 1;
        let nyquist_single = self.samples % 2 == 0;
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(k, a)| {
                let edge = k == 0 || (k == last && nyquist_single);
                if edge { a * a } else { 0.5 * a * a }
            })
            .sum::<f64>()
            / self.enbw
    }

    /// Median amplitude over bins away from DC and from `f`.
    pub fn noise_floor(&self, f: f64) -> f64 {
        let kf = self.nearest_bin(f) as i64;
        let mut v: Vec<f64> = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(k, _)| *k >= 2 && (*k as i64 - kf).abs() > 3)
            .map(|(_, a)| *a)
            .collect();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        v[v.len() / 2]
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(&["freq_hz", "amplitude_um"]);
        for (f, a) in self.freqs.iter().zip(&self.amplitudes) {
            t.row(&[Cell::Num(*f), Cell::Num(a / MICROMETER)]);
        }
        t
    }
}

/// Hann-windowed, mean-removed amplitude spectrum of a uniformly sampled trace.
pub fn amplitude_spectrum(trace: &SampledTrace) -> Result<SpectrumRecord> {
    let n = trace.len();
    if n < 32 {
        return Err(Error::Input(format!("need at least 32 frames, got {n}")));
    }
    let dt = (trace.times[n - 1] - trace.times[0]) / (n - 1) as f64;
    if !(dt > 0.0) || trace.times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-6 * dt) {
        return Err(Error::Input("frame times are not uniformly spaced".into()));
    }
    let window = Window::Hann;
    let w = window.coefficients(n);
    let sum_w: f64 = w.iter().sum();
    let sum_w2: f64 = w.iter().map(|x| x * x).sum();
    let mean = trace.z.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> =
        trace.z.iter().zip(&w).map(|(z, wk)| Complex::new((z - mean) * wk, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let bins = n / 2 + 1;
    let duration = n as f64 * dt;
    let mut freqs = Vec::with_capacity(bins);
    let mut amplitudes = Vec::with_capacity(bins);
    for (k, x) in buf.iter().take(bins).enumerate() {
        let edge = k == 0 || (n % 2 == 0 && k == n / 2);
        let scale = if edge { 1.0 } else { 2.0 };
        freqs.push(k as f64 / duration);
        amplitudes.push(scale * x.norm() / sum_w);
    }
    Ok(SpectrumRecord {
        freqs,
        amplitudes,
        duration,
        samples: n,
        window,
        enbw: n as f64 * sum_w2 / (sum_w * sum_w),
    })
}

/// Largest amplitude within one bin of the bin nearest `f`.
pub fn peak_amplitude(spec: &SpectrumRecord, f: f64) -> Result<f64> {
    let f_max = *spec.freqs.last().unwrap_or(&0.0);
    if !(f >= 0.0 && f <= f_max) {
        return Err(Error::Range(format!("{f} Hz outside [0, {f_max}] Hz")));
    }
    let k = spec.nearest_bin(f);
    let lo = k.saturating_sub(1);
    let hi = (k + 1).min(spec.amplitudes.len() - 1);
    Ok(spec.amplitudes[lo..=hi].iter().copied().fold(0.0, f64::max))
}

/// Ratio of peak amplitudes at `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Enhancement {
    pub factor: f64,
    /// The reference peak was below its noise floor; `factor` uses the floor and is a lower bound.
    pub floor_limited: bool,
}

pub fn enhancement_factor(on: &SpectrumRecord, reference: &SpectrumRecord, f: f64) -> Result<Enhancement> {
    if on.samples != reference.samples
        || (on.duration - reference.duration).abs() > 1e-9 * reference.duration
        || on.window != reference.window
    {
        return Err(Error::Input("spectra differ in record length or window".into()));
    }
    let a_on = peak_amplitude(on, f)?;
    let a_ref = peak_amplitude(reference, f)?;
    let floor = reference.noise_floor(f);
    if a_ref < floor || a_ref == 0.0 {
        let denom = if floor > 0.0 { floor } else { f64::MIN_POSITIVE };
        return Ok(Enhancement { factor: a_on / denom, floor_limited: true });
    }
    Ok(Enhancement { factor: a_on / a_ref, floor_limited: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn trace(n: usize, dt: f64, z: impl Fn(f64) -> f64) -> SampledTrace {
        let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
        SampledTrace { z: times.iter().map(|&t| z(t)).collect(), sigma: vec![0.0; n], times }
    }

    #[test]
    fn on_bin_tone_calibrated() {
        let tr = trace(960, 0.125, |t| 1e-6 * (TAU * 0.5 * t + 0.3).cos());
        let s = amplitude_spectrum(&tr).unwrap();
        assert!((s.bin_spacing() - 1.0 / 120.0).abs() < 1e-12);
        let a = peak_amplitude(&s, 0.5).unwrap();
        assert!((a / 1e-6 - 1.0).abs() < 0.01, "{a}");
    }

    #[test]
    fn constant_trace_is_flat_zero() {
        let tr = trace(256, 0.125, |_| 4.2e-6);
        let s = amplitude_spectrum(&tr).unwrap();
        assert!(s.amplitudes.iter().all(|&a| a < 1e-18));
    }

    #[test]
    fn mid_bin_leakage_bound() {
        let n = 960;
        let dt = 0.125;
        let f = 60.5 / (n as f64 * dt);
        let tr = trace(n, dt, |t| (TAU * f * t).sin());
        let s = amplitude_spectrum(&tr).unwrap();
        assert!(peak_amplitude(&s, f).unwrap() >= 0.6);
    }

    #[test]
    fn parseval_for_tones() {
        let n = 1024;
        let dt = 0.125;
        let dur = n as f64 * dt;
        let tones = [(7.0, 1.0, 0.1), (40.0, 0.5, 1.0), (101.0, 0.25, 2.0), (300.0, 0.8, -0.4)];
        let tr = trace(n, dt, |t| {
            tones.iter().map(|(k, a, ph)| a * (TAU * k / dur * t + ph).cos()).sum()
        });
        let s = amplitude_spectrum(&tr).unwrap();
        let direct = tr.z.iter().map(|z| z * z).sum::<f64>() / n as f64;
        assert!((s.mean_square() / direct - 1.0).abs() < 0.01);
    }

    #[test]
    fn parseval_for_chirp() {
        let n = 4096;
        let dt = 1e-3;
        let tr = trace(n, dt, |t| (PI * 50.0 * t * t + 20.0 * t).sin());
        let s = amplitude_spectrum(&tr).unwrap();
        let mean = tr.z.iter().sum::<f64>() / n as f64;
        let direct = tr.z.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / n as f64;
        assert!((s.mean_square() / direct - 1.0).abs() < 0.01, "{} {}", s.mean_square(), direct);
    }

    #[test]
    fn errors() {
        assert!(amplitude_spectrum(&trace(16, 0.1, |_| 0.0)).is_err());
        let mut tr = trace(64, 0.1, |_| 0.0);
        tr.times[10] += 0.03;
        assert!(matches!(amplitude_spectrum(&tr), Err(Error::Input(_))));
        let s = amplitude_spectrum(&trace(64, 0.1, |t| t.sin())).unwrap();
        assert!(peak_amplitude(&s, 6.0).is_err());
        let s2 = amplitude_spectrum(&trace(128, 0.1, |t| t.sin())).unwrap();
        assert!(enhancement_factor(&s, &s2, 1.0).is_err());
    }

    #[test]
    fn enhancement_linear_and_scale_invariant() {
        let base = trace(960, 0.125, |t| 5e-8 * (TAU * 0.5 * t).cos() + 1e-8 * (TAU * 1.3 * t).sin());
        let s = amplitude_spectrum(&base).unwrap();
        let e = enhancement_factor(&s, &s, 0.5).unwrap();
        assert!((e.factor - 1.0).abs() < 1e-12 && !e.floor_limited);
        let mut doubled = base.clone();
        doubled.z.iter_mut().for_each(|z| *z *= 2.0);
        let s2 = amplitude_spectrum(&doubled).unwrap();
        assert!((enhancement_factor(&s2, &s, 0.5).unwrap().factor - 2.0).abs() < 1e-9);
        let mut scaled = doubled.clone();
        scaled.z.iter_mut().for_each(|z| *z *= 7.0);
        let mut scaled_ref = base.clone();
        scaled_ref.z.iter_mut().for_each(|z| *z *= 7.0);
        let r = enhancement_factor(&amplitude_spectrum(&scaled).unwrap(), &amplitude_spectrum(&scaled_ref).unwrap(), 0.5)
            .unwrap();
        assert!((r.factor - 2.0).abs() < 1e-9);
    }
}
