use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::curve::PsdEstimate;
use crate::error::{Error, Result};
use crate::noise_gen::RngStream;

const TAG_RTO: u64 = 0x52544f;

/// Repeated-frequency-measurement spectroscopy of flux noise. Flux is in µΦ₀,
/// densities are single-sided in (µΦ₀)²/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RtoConfig {
    /// 1/f amplitude at 1 Hz, (µΦ₀)².
    pub s_star: f64,
    pub alpha: f64,
    /// Readout-limited white floor, (µΦ₀)²/Hz.
    pub s_white: f64,
    /// Nyquist frequency of the measurement (Hz); samples are taken at `2 f_n`.
    #[serde(default = "one")]
    pub f_n: f64,
    /// Length of one record (s).
    #[serde(default = "default_duration")]
    pub duration: f64,
    /// Independent records averaged into the estimate.
    #[serde(default = "default_records")]
    pub records: usize,
    /// Welch segment length (samples, even).
    #[serde(default = "default_segment")]
    pub segment: usize,
    /// Flux trace grid points per measurement interval; content above `f_n`
    /// folds back into the measured band.
    #[serde(default = "default_oversample")]
    pub oversample: usize,
    /// Flux-to-frequency slope (Hz/Φ₀).
    #[serde(default = "default_dfdphi")]
    pub dfdphi: f64,
    /// Ramsey time of each frequency measurement (s).
    #[serde(default = "default_ramsey_time")]
    pub ramsey_time: f64,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}
fn default_duration() -> f64 {
    600.0
}
fn default_records() -> usize {
    8
}
fn default_segment() -> usize {
    256
}
fn default_oversample() -> usize {
    2
}
fn default_dfdphi() -> f64 {
    1.0e9
}
fn default_ramsey_time() -> f64 {
    1.0e-6
}

impl Default for RtoConfig {
    fn default() -> Self {
        Self {
            s_star: 2.4,
            alpha: 0.99,
            s_white: 9.7,
            f_n: one(),
            duration: default_duration(),
            records: default_records(),
            segment: default_segment(),
            oversample: default_oversample(),
            dfdphi: default_dfdphi(),
            ramsey_time: default_ramsey_time(),
            seed: 0,
        }
    }
}

impl RtoConfig {
    fn samples(&self) -> usize {
        (2.0 * self.f_n * self.duration).round() as usize
    }

    pub fn diagnostics(&self) -> Vec<String> {
        let mut d = Vec::new();
        let mut nonneg = |name: &str, v: f64| {
            if !(v.is_finite() && v >= 0.0) {
                d.push(format!("rto.{name} must be finite and >= 0, got {v}"));
            }
        };
        nonneg("s_star", self.s_star);
        nonneg("s_white", self.s_white);
        for (name, v) in [
            ("alpha", self.alpha),
            ("f_n", self.f_n),
            ("duration", self.duration),
            ("dfdphi", self.dfdphi),
            ("ramsey_time", self.ramsey_time),
        ] {
            if !(v.is_finite() && v > 0.0) {
                d.push(format!("rto.{name} must be finite and > 0, got {v}"));
            }
        }
        if self.records == 0 {
            d.push("rto.records must be >= 1".into());
        }
        if self.oversample == 0 {
            d.push("rto.oversample must be >= 1".into());
        }
        if self.segment < 4 || self.segment % 2 != 0 {
            d.push(format!("rto.segment must be even and >= 4, got {}", self.segment));
        } else if self.f_n > 0.0 && self.duration > 0.0 && self.samples() < self.segment {
            d.push(format!("rto.segment ({}) exceeds the samples per record ({})", self.segment, self.samples()));
        }
        d
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.diagnostics();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(d))
        }
    }
}

/// Periodic Gaussian trace of `n` points spaced `dt` with single-sided density
/// `s_star/f^alpha` (zero mean, no DC).
pub fn power_law_trace<R: Rng + ?Sized>(s_star: f64, alpha: f64, n: usize, dt: f64, rng: &mut R) -> Vec<f64> {
    let df = 1.0 / (n as f64 * dt);
    let mut spec = vec![Complex64::new(0.0, 0.0); n];
    if s_star > 0.0 {
        for k in 1..=n / 2 {
            let s = s_star / (k as f64 * df).powf(alpha);
            let g1: f64 = rng.sample(StandardNormal);
            let g2: f64 = rng.sample(StandardNormal);
            if 2 * k == n {
                // The Nyquist bin is real and carries the whole band variance.
                spec[k] = Complex64::new((s * df / 2.0).sqrt() * g1, 0.0);
            } else {
                // E|c_k|² = S·df/2 so that the two mirrored bins hold S·df.
                let c = Complex64::new(g1, g2) * (s * df / 4.0).sqrt();
                spec[k] = c;
                spec[n - k] = c.conj();
            }
        }
    }
    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut spec);
    spec.into_iter().map(|c| c.re).collect()
}

/// Welch estimate: Hann window, 50% overlap, single-sided, DC dropped.
/// Returns `(freqs, psd, segments)`.
pub fn welch_psd(x: &[f64], fs: f64, segment: usize) -> Result<(Vec<f64>, Vec<f64>, usize)> {
    if segment < 4 || segment % 2 != 0 || x.len() < segment {
        return Err(Error::domain(format!("Welch needs an even segment >= 4 within the data, got {segment}")));
    }
    let w: Vec<f64> = (0..segment).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / segment as f64).cos()).collect();
    let u: f64 = w.iter().map(|v| v * v).sum();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(segment);
    let half = segment / 2;
    let mut acc = vec![0.0; half];
    let mut count = 0;
    let mut start = 0;
    while start + segment <= x.len() {
        let seg = &x[start..start + segment];
        let mean = seg.iter().sum::<f64>() / segment as f64;
        let mut buf: Vec<Complex64> = seg.iter().zip(&w).map(|(v, w)| Complex64::new((v - mean) * w, 0.0)).collect();
        fft.process(&mut buf);
        for k in 1..=half {
            let scale = if k == half { 1.0 } else { 2.0 };
            acc[k - 1] += scale * buf[k].norm_sqr() / (fs * u);
        }
        count += 1;
        start += half;
    }
    let freqs = (1..=half).map(|k| k as f64 * fs / segment as f64).collect();
    Ok((freqs, acc.into_iter().map(|v| v / count as f64).collect(), count))
}

/// Simulates the frequency-measurement record and returns the averaged flux PSD.
/// Each sample is a short Ramsey measurement of the flux-shifted frequency,
/// converted back to flux; readout projection noise sets the white floor.
pub fn run_rto(cfg: &RtoConfig) -> Result<PsdEstimate> {
    cfg.validate()?;
    let n = cfg.samples();
    let fs = 2.0 * cfg.f_n;
    let fine = n * cfg.oversample;
    let dt_fine = 1.0 / (fs * cfg.oversample as f64);
    let sigma_white = (cfg.s_white * cfg.f_n).sqrt();
    let base = RngStream::new(cfg.seed, TAG_RTO);
    let mut total = Vec::new();
    let mut freqs = Vec::new();
    let mut segments = 0;
    for rec in 0..cfg.records {
        let stream = base.child(rec as u64);
        let flux = power_law_trace(cfg.s_star, cfg.alpha, fine, dt_fine, &mut stream.child(1).rng());
        let mut noise = stream.child(2).rng();
        let record: Vec<f64> = (0..n)
            .map(|j| {
                let phi0 = flux[j * cfg.oversample] * 1e-6;
                let phase = 2.0 * PI * cfg.dfdphi * phi0 * cfg.ramsey_time;
                let f_hat = phase / (2.0 * PI * cfg.ramsey_time);
                let readout: f64 = noise.sample(StandardNormal);
                f_hat / cfg.dfdphi * 1e6 + sigma_white * readout
            })
            .collect();
        let (f, p, c) = welch_psd(&record, fs, cfg.segment)?;
        if total.is_empty() {
            total = vec![0.0; p.len()];
            freqs = f;
        }
        for (t, v) in total.iter_mut().zip(&p) {
            *t += v * c as f64;
        }
        segments += c;
    }
    let values = total.into_iter().map(|v| v / segments as f64).collect();
    Ok(PsdEstimate { freqs, values, segments, f_n: cfg.f_n })
}
