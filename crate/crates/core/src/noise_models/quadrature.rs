use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use super::{Filter, SpectralDensity};
use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Default relative tolerance of [`phi2_from_spectrum`].
pub const DEFAULT_REL_TOL: f64 = 1e-9;
const MAX_EVALUATIONS: usize = 20_000_000;

/// Value and error estimate of a numerical integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature over the panels defined by
/// consecutive `breakpoints`. Stops when the summed error estimate is below
/// `max(abs_tol, rel_tol·|I|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    breakpoints: &[f64],
    abs_tol: f64,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    if breakpoints.len() < 2 {
        return Err(Error::domain("need at least two breakpoints"));
    }
    let mut heap = BinaryHeap::new();
    let mut total = 0.0;
    let mut total_err = 0.0;
    let mut evaluations = 0usize;
    for w in breakpoints.windows(2) {
        let (value, error) = gauss_kronrod(&f, w[0], w[1]);
        evaluations += 15;
        total += value;
        total_err += error;
        heap.push(Segment { a: w[0], b: w[1], value, error });
    }
    loop {
        if !total.is_finite() {
            return Err(Error::Quadrature {
                what: "non-finite integrand".into(),
                estimate: total,
                error_estimate: total_err,
                evaluations,
            });
        }
        if total_err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(QuadratureResult { value: total, error_estimate: total_err, evaluations });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if evaluations > MAX_EVALUATIONS || mid <= worst.a || mid >= worst.b {
            return Err(Error::Quadrature {
                what: "subdivision limit reached".into(),
                estimate: total,
                error_estimate: total_err,
                evaluations,
            });
        }
        let (v1, e1) = gauss_kronrod(&f, worst.a, mid);
        let (v2, e2) = gauss_kronrod(&f, mid, worst.b);
        evaluations += 30;
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.error;
        heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
        heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
    }
}

/// Phase variance `⟨φ²(τ)⟩ = τ² ∫₀^∞ S(ω) F(ωτ) dω/2π` at the default relative tolerance.
pub fn phi2_from_spectrum(s: &SpectralDensity, tau: f64, filter: Filter) -> Result<f64> {
    Ok(phi2_from_spectrum_tol(s, tau, filter, DEFAULT_REL_TOL)?.value)
}

/// Filter integral with an explicit relative tolerance.
///
/// With the filters written as `(2/π)sin²(ωτ/2)/ω²` (Ramsey) and
/// `(8/π)sin⁴(ωτ/4)/ω²` (echo), the range is split at a few filter periods,
/// `ω_a`. Below `ω_a` the full integrand is integrated (on a log grid when the
/// support reaches far below `1/τ`). Above `ω_a` the filter is expanded into a
/// non-oscillatory part `c/πω²`, integrated to infinity after mapping
/// `u = ω_a/ω`, and oscillatory cosine terms, integrated over whole periods up
/// to `W`. Ending on a whole period makes the first integration-by-parts term
/// of the cosine tail vanish, leaving a remainder bounded by
/// `Σ_k |a_k|·2g(W)/(W k²)` with `g = S/πω²`; `W` is doubled until that bound
/// falls below a tenth of the requested tolerance.
pub fn phi2_from_spectrum_tol(
    s: &SpectralDensity,
    tau: f64,
    filter: Filter,
    rel_tol: f64,
) -> Result<QuadratureResult> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::domain(format!("idle time must be finite and >= 0, got {tau}")));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::domain("relative tolerance must be > 0"));
    }
    let point_mass = match filter {
        Filter::Ramsey => s.point_mass_variance() * tau * tau,
        Filter::Echo => 0.0,
    };
    if tau == 0.0 || !s.has_continuous_part() {
        return Ok(QuadratureResult { value: point_mass, error_estimate: 0.0, evaluations: 0 });
    }

    let (w_min, w_max) = s.support();
    // (amplitude, angular frequency of the cosine in ω) of the oscillatory terms
    let (smooth_coef, cosines, period): (f64, &[(f64, f64)], f64) = match filter {
        Filter::Ramsey => (1.0, &[(-1.0, 1.0)], 2.0 * PI / tau),
        Filter::Echo => (3.0, &[(-4.0, 0.5), (1.0, 1.0)], 4.0 * PI / tau),
    };
    let kernel = |w: f64| -> f64 {
        match filter {
            Filter::Ramsey => {
                let x = (0.5 * w * tau).sin();
                2.0 / PI * x * x / (w * w)
            }
            Filter::Echo => {
                let x = (0.25 * w * tau).sin();
                let x2 = x * x;
                8.0 / PI * x2 * x2 / (w * w)
            }
        }
    };
    let full = |w: f64| -> f64 {
        if w <= 0.0 {
            // limit of the kernel at ω → 0
            return match filter {
                Filter::Ramsey => s.eval(0.0) * tau * tau / (2.0 * PI),
                Filter::Echo => 0.0,
            };
        }
        s.eval(w) * kernel(w)
    };

    let mut evaluations = 0usize;
    let mut value = point_mass;
    let mut error = 0.0;

    // Region below ω_a: whole integrand.
    let omega_a = (4.0 * period).max(w_min).min(w_max);
    if omega_a > w_min {
        let res = if w_min > 0.0 && omega_a / w_min > 10.0 {
            let (la, lb) = (w_min.ln(), omega_a.ln());
            let n = ((lb - la) / 0.5).ceil().max(1.0) as usize;
            let bps: Vec<f64> = (0..=n).map(|i| la + (lb - la) * i as f64 / n as f64).collect();
            integrate_adaptive(|x| { let w = x.exp(); full(w) * w }, &bps, 0.0, rel_tol * 0.25)?
        } else {
            let n = (((omega_a - w_min) / (0.5 * period)).ceil() as usize).max(1);
            let bps: Vec<f64> = (0..=n).map(|i| w_min + (omega_a - w_min) * i as f64 / n as f64).collect();
            integrate_adaptive(full, &bps, 0.0, rel_tol * 0.25)?
        };
        value += res.value;
        error += res.error_estimate;
        evaluations += res.evaluations;
    }
    if omega_a >= w_max {
        return Ok(QuadratureResult { value, error_estimate: error, evaluations });
    }

    // Non-oscillatory part above ω_a.
    let u_lo = if w_max.is_finite() { omega_a / w_max } else { 0.0 };
    let bps: Vec<f64> = (0..=16).map(|i| u_lo + (1.0 - u_lo) * i as f64 / 16.0).collect();
    let smooth = integrate_adaptive(
        // Kronrod nodes never touch u = 0.
        |u| s.eval(omega_a / u) * smooth_coef / (PI * omega_a),
        &bps,
        0.0,
        rel_tol * 0.25,
    )?;
    value += smooth.value;
    error += smooth.error_estimate;
    evaluations += smooth.evaluations;

    // Oscillatory part above ω_a.
    let osc = |w: f64| -> f64 {
        let g = s.eval(w) / (PI * w * w);
        cosines.iter().map(|&(a, k)| a * (k * w * tau).cos()).sum::<f64>() * g
    };
    let abs_budget = 0.25 * rel_tol * value.abs();
    let mut lo = omega_a;
    let mut n_periods = 64usize;
    loop {
        let start_index = (lo / period).round();
        let hi_unclipped = (start_index + n_periods as f64) * period;
        let hi = hi_unclipped.min(w_max);
        let n = ((hi - lo) / (0.5 * period)).ceil().max(1.0) as usize;
        let bps: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
        let res = integrate_adaptive(osc, &bps, abs_budget * 0.5, 0.0)?;
        value += res.value;
        error += res.error_estimate;
        evaluations += res.evaluations;
        if hi >= w_max {
            break;
        }
        let g = s.eval(hi) / (PI * hi * hi);
        let tail_bound: f64 =
            cosines.iter().map(|&(a, k)| a.abs() * 2.0 * g / (hi * (k * tau).powi(2))).sum();
        if tail_bound < 0.1 * rel_tol * value.abs() {
            error += tail_bound;
            break;
        }
        if evaluations > MAX_EVALUATIONS {
            return Err(Error::Quadrature {
                what: format!("oscillatory tail of the {} spectrum", s.label()),
                estimate: value,
                error_estimate: error + tail_bound,
                evaluations,
            });
        }
        lo = hi;
        n_periods *= 2;
    }
    Ok(QuadratureResult { value, error_estimate: error, evaluations })
}
