use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rustfft::FftPlanner;

use super::FrequencyTrace;
use crate::error::{Error, Result};
use crate::noise_models::TelegraphParams;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Gaussian phase increment of white detuning noise over `dt`: mean 0, variance `2dt/T_φ1`.
pub fn gen_white_phase<R: Rng + ?Sized>(dt: f64, t_phi1: f64, rng: &mut R) -> f64 {
    if dt <= 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    z * (2.0 * dt / t_phi1).sqrt()
}

/// Quasi-static detuning: one draw from `N(0, σ²)` held for the whole trace.
pub fn gen_quasistatic<R: Rng + ?Sized>(sigma: f64, duration: f64, rng: &mut R) -> FrequencyTrace {
    if sigma <= 0.0 {
        return FrequencyTrace::zero(duration);
    }
    let z: f64 = rng.sample(StandardNormal);
    FrequencyTrace::constant(sigma * z, duration)
}

/// Random telegraph trace with exact exponential dwell times. The initial
/// level is drawn from the stationary distribution; levels are zero-mean.
pub fn gen_telegraph_trace<R: Rng + ?Sized>(
    p: &TelegraphParams,
    duration: f64,
    rng: &mut R,
) -> Result<FrequencyTrace> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::domain(format!("trace duration must be finite and > 0, got {duration}")));
    }
    let (up_level, down_level) = p.levels();
    let leave_up = Exp::new(p.gamma_down).map_err(|e| Error::domain(e.to_string()))?;
    let leave_down = Exp::new(p.gamma_up).map_err(|e| Error::domain(e.to_string()))?;
    let mut up = rng.random::<f64>() < p.p_up();
    let mut levels = vec![if up { up_level } else { down_level }];
    let mut switches = Vec::new();
    let mut t = 0.0;
    loop {
        t += if up { leave_up.sample(rng) } else { leave_down.sample(rng) };
        if t >= duration {
            break;
        }
        up = !up;
        switches.push(t);
        levels.push(if up { up_level } else { down_level });
    }
    FrequencyTrace::piecewise(switches, levels, duration)
}

/// Grid and memory options for the 1/f synthesiser.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneOverFOptions {
    /// Requested grid step; defaults to `min(1 ns, 1/(2 f_max))`.
    pub dt: Option<f64>,
    /// Largest number of grid samples allowed for one period.
    pub max_samples: usize,
}

impl Default for OneOverFOptions {
    fn default() -> Self {
        Self { dt: None, max_samples: 1 << 24 }
    }
}

/// 1/f trace `S(ω) = s_1f/(ω/2π)` between `f_c` and `f_max` with default options.
pub fn gen_one_over_f_trace<R: Rng + ?Sized>(
    s_1f: f64,
    f_c: f64,
    f_max: f64,
    duration: f64,
    rng: &mut R,
) -> Result<FrequencyTrace> {
    gen_one_over_f_trace_with(s_1f, f_c, f_max, duration, OneOverFOptions::default(), rng)
}

/// Harmonic-sum synthesis of 1/f noise: cosines at `f_k = k·f_c`,
/// `k = 1..=⌊f_max/f_c⌋`, with uniform random phases, evaluated on one period
/// `1/f_c` by an inverse FFT and repeated periodically.
///
/// Each harmonic carries the variance of its frequency band,
/// `s_1f·ln(f_hi/f_lo)` over `[(k−½)f_c, (k+½)f_c] ∩ [f_c, f_max]`, so the total
/// variance is exactly `s_1f·ln(f_max/f_c)` as for the continuous spectrum.
pub fn gen_one_over_f_trace_with<R: Rng + ?Sized>(
    s_1f: f64,
    f_c: f64,
    f_max: f64,
    duration: f64,
    opts: OneOverFOptions,
    rng: &mut R,
) -> Result<FrequencyTrace> {
    if !(s_1f >= 0.0 && f_c > 0.0 && f_max > f_c && duration > 0.0) {
        return Err(Error::domain(format!(
            "1/f synthesis needs s_1f >= 0, 0 < f_c < f_max, duration > 0 (got {s_1f}, {f_c}, {f_max}, {duration})"
        )));
    }
    let dt_max = opts.dt.unwrap_or(1e-9).min(0.5 / f_max);
    let needed = (1.0 / (f_c * dt_max)).ceil();
    if !(needed <= opts.max_samples as f64) {
        return Err(Error::Resource(format!(
            "1/f grid needs {needed:.3e} samples per period (f_c = {f_c} Hz, dt = {dt_max:e} s), limit {}",
            opts.max_samples
        )));
    }
    let n = (needed as usize).next_power_of_two().max(4);
    if n > opts.max_samples {
        return Err(Error::Resource(format!("1/f grid of {n} samples exceeds limit {}", opts.max_samples)));
    }
    let dt = 1.0 / (f_c * n as f64);
    let k_max = ((f_max / f_c).floor() as usize).min(n / 2 - 1);
    let upper = f_max / f_c;
    let mut spectrum = vec![Complex64::new(0.0, 0.0); n];
    for k in 1..=k_max {
        let lo = (k as f64 - 0.5).max(1.0);
        let hi = (k as f64 + 0.5).min(upper);
        let band = if hi > lo { s_1f * (hi / lo).ln() } else { 0.0 };
        let amp = (2.0 * band).sqrt();
        let theta = 2.0 * PI * rng.random::<f64>();
        let c = Complex64::from_polar(0.5 * amp, theta);
        spectrum[k] = c;
        spectrum[n - k] = c.conj();
    }
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n).process(&mut spectrum));
    let values: Vec<f64> = spectrum.iter().map(|c| c.re).collect();
    FrequencyTrace::sampled(dt, values, duration)
}

/// 1/f noise as a sum of `n` symmetric telegraph fluctuators whose switching
/// rates are log-uniform in `[2πf_c, 2πf_max]`, each with detuning variance
/// `s_1f·ln(f_max/f_c)/n`. Averaged over the rate distribution the spectrum is
/// `(4s_1f/ω)(atan(2πf_max/ω) − atan(2πf_c/ω))`, i.e. `2πs_1f/ω` well inside the band.
pub fn gen_summed_telegraph_one_over_f<R: Rng + ?Sized>(
    s_1f: f64,
    f_c: f64,
    f_max: f64,
    n: usize,
    duration: f64,
    rng: &mut R,
) -> Result<FrequencyTrace> {
    if !(s_1f > 0.0 && f_c > 0.0 && f_max > f_c && n > 0) {
        return Err(Error::domain("summed-telegraph 1/f needs s_1f > 0, 0 < f_c < f_max, n > 0"));
    }
    let log_span = (f_max / f_c).ln();
    let sigma = (s_1f * log_span / n as f64).sqrt();
    let mut parts = Vec::with_capacity(n);
    for _ in 0..n {
        let gamma_sum = 2.0 * PI * f_c * (log_span * rng.random::<f64>()).exp();
        let p = TelegraphParams::new(0.5 * gamma_sum, 0.5 * gamma_sum, 2.0 * sigma)?;
        parts.push(gen_telegraph_trace(&p, duration, rng)?);
    }
    FrequencyTrace::sum(parts)
}
