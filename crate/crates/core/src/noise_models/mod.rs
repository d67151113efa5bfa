//! Closed-form phase variances for the noise processes that dephase an idling
//! qubit, their spectral densities, and a quadrature route through the filter
//! integrals that serves as an independent check on every closed form.
//!
//! Units: times in seconds, frequencies in Hz, angular frequencies in rad/s.
//! Spectral densities are single-sided in angular frequency, normalised so
//! that the variance of the detuning is `∫₀^∞ S(ω) dω/2π`.
//!
//! The 1/f strength `s_1f` is the coefficient in `S(ω) = s_1f / (ω/2π)`, i.e. the
//! single-sided density of the angular detuning at 1 Hz, in rad²/s.

mod device;
mod quadrature;
mod spectrum;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use device::{charge_dispersion, charge_dispersion_from_ratio, ej_over_ec, omega_zz, zz_error_per_gate};
pub use quadrature::{integrate_adaptive, phi2_from_spectrum, phi2_from_spectrum_tol, QuadratureResult};
pub use spectrum::{SpectralDensity, TelegraphParams};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Upper bound on `f_c·τ` for the asymptotic 1/f Ramsey form.
pub const ONE_OVER_F_MAX_FC_TAU: f64 = 0.2;

/// Constant inside the logarithm of the 1/f Ramsey variance,
/// `S τ² ln(c / (f_c τ))`. It is the exact small-cutoff limit
/// `exp(3/2 − γ) / 2π ≈ 0.40048` of the sinc² filter integral.
pub fn one_over_f_log_constant() -> f64 {
    (1.5 - EULER_GAMMA).exp() / (2.0 * std::f64::consts::PI)
}

/// Which pulse sequence filters the noise during an idle of length τ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Filter {
    /// Free evolution (sinc² filter).
    Ramsey,
    /// Hahn echo with a π pulse at τ/2.
    Echo,
}

/// Parameter set of the combined idle-error model. Absent fields mean the
/// corresponding mechanism is not modelled, which is different from a
/// mechanism present with zero strength.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseModelParams {
    /// Energy relaxation time T₁ (s).
    pub t1: Option<f64>,
    /// White-noise dephasing time T_φ1 (s).
    pub t_phi1: Option<f64>,
    /// Long-time correlated dephasing time T_φ2 (s).
    pub t_phi2: Option<f64>,
    /// 1/f strength (rad²/s); requires `f_c`.
    pub s_1f: Option<f64>,
    /// Low-frequency cutoff of the 1/f noise (Hz).
    pub f_c: Option<f64>,
    /// Telegraph switching time T_sw (s); requires `delta_f10`.
    pub t_sw: Option<f64>,
    /// Effective telegraph switching amplitude Δf₁₀ (Hz).
    pub delta_f10: Option<f64>,
}

impl NoiseModelParams {
    pub fn with_t1(mut self, t1: f64) -> Self {
        self.t1 = Some(t1);
        self
    }

    pub fn with_white(mut self, t_phi1: f64) -> Self {
        self.t_phi1 = Some(t_phi1);
        self
    }

    pub fn with_correlated(mut self, t_phi2: f64) -> Self {
        self.t_phi2 = Some(t_phi2);
        self
    }

    pub fn with_one_over_f(mut self, s_1f: f64, f_c: f64) -> Self {
        self.s_1f = Some(s_1f);
        self.f_c = Some(f_c);
        self
    }

    pub fn with_telegraph(mut self, t_sw: f64, delta_f10: f64) -> Self {
        self.t_sw = Some(t_sw);
        self.delta_f10 = Some(delta_f10);
        self
    }

    /// Checks positivity of every present field and that paired fields come together.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("t1", self.t1),
            ("t_phi1", self.t_phi1),
            ("t_phi2", self.t_phi2),
            ("s_1f", self.s_1f),
            ("f_c", self.f_c),
            ("t_sw", self.t_sw),
            ("delta_f10", self.delta_f10),
        ];
        for (name, value) in fields {
            if let Some(v) = value {
                if !(v.is_finite() && v > 0.0) {
                    return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
                }
            }
        }
        if self.s_1f.is_some() != self.f_c.is_some() {
            return Err(Error::domain("s_1f and f_c must be given together"));
        }
        if self.t_sw.is_some() != self.delta_f10.is_some() {
            return Err(Error::domain("t_sw and delta_f10 must be given together"));
        }
        Ok(())
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::domain(format!("idle time must be finite and >= 0, got {tau}")));
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
    }
    Ok(())
}

/// White-noise phase variance `2τ/T_φ1`; identical for Ramsey and echo.
pub fn phi2_white(tau: f64, t_phi1: f64) -> Result<f64> {
    check_tau(tau)?;
    check_positive("t_phi1", t_phi1)?;
    Ok(2.0 * tau / t_phi1)
}

/// Quasi-static phase variance `2(τ/T_φ2)²`; an echo refocuses it completely.
pub fn phi2_corr(tau: f64, t_phi2: f64, filter: Filter) -> Result<f64> {
    check_tau(tau)?;
    check_positive("t_phi2", t_phi2)?;
    Ok(match filter {
        Filter::Ramsey => 2.0 * (tau / t_phi2).powi(2),
        Filter::Echo => 0.0,
    })
}

/// 1/f phase variance with low-frequency cutoff `f_c`.
///
/// Ramsey: `S τ² ln(c/(f_c τ))` with `c = one_over_f_log_constant()`, valid for
/// `f_c τ ≤ 0.2` (a hard error beyond). Echo: `S τ² ln 2`.
pub fn phi2_one_over_f(tau: f64, s_1f: f64, f_c: f64, filter: Filter) -> Result<f64> {
    check_tau(tau)?;
    check_positive("s_1f", s_1f)?;
    check_positive("f_c", f_c)?;
    if tau == 0.0 {
        return Ok(0.0);
    }
    match filter {
        Filter::Ramsey => {
            let x = f_c * tau;
            if x > ONE_OVER_F_MAX_FC_TAU {
                return Err(Error::domain(format!(
                    "1/f Ramsey variance requires f_c·τ <= {ONE_OVER_F_MAX_FC_TAU}, got {x:.4} \
                     (f_c = {f_c} Hz, τ = {tau} s)"
                )));
            }
            Ok(s_1f * tau * tau * (one_over_f_log_constant() / x).ln())
        }
        Filter::Echo => Ok(s_1f * tau * tau * std::f64::consts::LN_2),
    }
}

/// `Σ_{k≥k0} c_k (−x)^k/k!`, summed to convergence; used below x = 1 where the
/// closed forms lose digits to cancellation.
fn exp_tail_series(x: f64, k0: u32, coeff: impl Fn(u32) -> f64) -> f64 {
    let mut term = 1.0;
    for k in 1..k0 {
        term *= -x / k as f64;
    }
    let mut sum = 0.0;
    for k in k0..60 {
        term *= -x / k as f64;
        let add = coeff(k) * term;
        sum += add;
        if add.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// `x − 1 + e^{−x}`, accurate for small x.
fn ramsey_telegraph_shape(x: f64) -> f64 {
    if x < 1.0 {
        exp_tail_series(x, 2, |_| 1.0)
    } else {
        x + (-x).exp_m1()
    }
}

/// `x − 3 − e^{−x} + 4e^{−x/2}`, accurate for small x.
fn echo_telegraph_shape(x: f64) -> f64 {
    if x < 1.0 {
        exp_tail_series(x, 3, |k| 4.0 * 0.5f64.powi(k as i32) - 1.0)
    } else {
        x - 3.0 - (-x).exp() + 4.0 * (-0.5 * x).exp()
    }
}

/// Dimensionless telegraph shape `h(x)` with `⟨φ²⟩ = (2πΔf₁₀ T_sw)² h(τ/T_sw)`.
pub(crate) fn telegraph_shape(x: f64, filter: Filter) -> f64 {
    match filter {
        Filter::Ramsey => ramsey_telegraph_shape(x),
        Filter::Echo => echo_telegraph_shape(x),
    }
}

/// `h'(x)`: `1 − e^{−x}` (Ramsey), `(1 − e^{−x/2})²` (echo).
pub(crate) fn telegraph_shape_derivative(x: f64, filter: Filter) -> f64 {
    match filter {
        Filter::Ramsey => -(-x).exp_m1(),
        Filter::Echo => (-0.5 * x).exp_m1().powi(2),
    }
}

/// Telegraph phase variance in the effective parameterisation
/// `(2πΔf₁₀)² T_sw (τ − T_sw(1 − e^{−τ/T_sw}))` (Ramsey) and
/// `(2πΔf₁₀)² T_sw (τ − T_sw(3 + e^{−τ/T_sw} − 4e^{−τ/2T_sw}))` (echo).
pub fn phi2_telegraph(tau: f64, delta_f10: f64, t_sw: f64, filter: Filter) -> Result<f64> {
    check_tau(tau)?;
    check_positive("delta_f10", delta_f10)?;
    check_positive("t_sw", t_sw)?;
    let w = 2.0 * std::f64::consts::PI * delta_f10;
    let x = tau / t_sw;
    Ok(w * w * t_sw * t_sw * telegraph_shape(x, filter))
}

/// Ramsey coherence `⟨cos φ(τ)⟩` of the symmetric telegraph in the effective
/// parameterisation: levels `±a` with `a² = (2πΔf₁₀)²/2`, flip rate
/// `γ = 1/(2T_sw)` each way, and `⟨cos φ⟩ = e^{−γτ}[cosh μτ + (γ/μ) sinh μτ]`
/// with `μ² = γ² − a²` (oscillating when `a > γ`).
pub fn telegraph_coherence(tau: f64, delta_f10: f64, t_sw: f64) -> Result<f64> {
    check_tau(tau)?;
    check_positive("delta_f10", delta_f10)?;
    check_positive("t_sw", t_sw)?;
    let a2 = (2.0 * std::f64::consts::PI * delta_f10).powi(2) / 2.0;
    let g = 0.5 / t_sw;
    let mu2 = g * g - a2;
    let gt = g * tau;
    Ok(if mu2.abs() * tau * tau < 1e-8 {
        (-gt).exp() * (1.0 + 0.5 * mu2 * tau * tau + gt * (1.0 + mu2 * tau * tau / 6.0))
    } else if mu2 > 0.0 {
        // e^{−(γ−μ)τ} with γ − μ = a²/(γ + μ) to avoid cancellation
        let mu = mu2.sqrt();
        let slow = (-a2 / (g + mu) * tau).exp();
        let fast = (-(g + mu) * tau).exp();
        0.5 * (1.0 + g / mu) * slow + 0.5 * (1.0 - g / mu) * fast
    } else {
        let nu = (-mu2).sqrt();
        (-gt).exp() * ((nu * tau).cos() + g / nu * (nu * tau).sin())
    })
}

/// Per-mechanism contributions to the idle error `r_I(τ)`; absent mechanisms are `None`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct IdleErrorTerms {
    pub t1: Option<f64>,
    pub white: Option<f64>,
    pub correlated: Option<f64>,
    pub one_over_f: Option<f64>,
    pub telegraph: Option<f64>,
}

impl IdleErrorTerms {
    pub fn total(&self) -> f64 {
        [self.t1, self.white, self.correlated, self.one_over_f, self.telegraph]
            .iter()
            .flatten()
            .sum()
    }
}

/// Idle error decomposed by mechanism: `τ/3T₁` plus one sixth of each phase variance.
pub fn idle_error_terms(p: &NoiseModelParams, tau: f64, filter: Filter) -> Result<IdleErrorTerms> {
    check_tau(tau)?;
    p.validate()?;
    let sixth = |v: f64| v / 6.0;
    Ok(IdleErrorTerms {
        t1: p.t1.map(|t1| tau / (3.0 * t1)),
        white: p.t_phi1.map(|t| phi2_white(tau, t)).transpose()?.map(sixth),
        correlated: p.t_phi2.map(|t| phi2_corr(tau, t, filter)).transpose()?.map(sixth),
        one_over_f: match (p.s_1f, p.f_c) {
            (Some(s), Some(fc)) => Some(sixth(phi2_one_over_f(tau, s, fc, filter)?)),
            _ => None,
        },
        telegraph: match (p.t_sw, p.delta_f10) {
            (Some(t_sw), Some(df)) => Some(sixth(phi2_telegraph(tau, df, t_sw, filter)?)),
            _ => None,
        },
    })
}

/// RB error of an idle of length `tau`: `τ/(3T₁) + ⟨φ²(τ)⟩/6` summed over the
/// mechanisms present in `p`.
pub fn rb_error_from_variance(p: &NoiseModelParams, tau: f64, filter: Filter) -> Result<f64> {
    Ok(idle_error_terms(p, tau, filter)?.total())
}

/// Ramsey/echo visibility `A·exp(−⟨φ²⟩/2) + B`.
pub fn visibility_from_variance(phi2: f64, a: f64, b: f64) -> Result<f64> {
    if phi2.is_nan() || phi2 < 0.0 {
        return Err(Error::domain(format!("phase variance must be >= 0, got {phi2}")));
    }
    Ok(a * (-0.5 * phi2).exp() + b)
}

/// Inverse of [`visibility_from_variance`].
pub fn variance_from_visibility(v: f64, a: f64, b: f64) -> Result<f64> {
    let ratio = (v - b) / a;
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::domain(format!("visibility {v} not above offset {b} for scale {a}")));
    }
    Ok(-2.0 * ratio.ln())
}

/// Quasi-static dephasing time with the same short-time variance as the
/// telegraph form: `2(τ/T_φ2)² = (2πΔf₁₀)² τ²/2`, i.e. `T_φ2 = 2/(2πΔf₁₀)`.
pub fn telegraph_equivalent_t_phi2(delta_f10: f64) -> f64 {
    2.0 / (2.0 * std::f64::consts::PI * delta_f10)
}

/// White-noise dephasing time with the same long-time slope as the telegraph
/// form: `2τ/T_φ1 = (2πΔf₁₀)² T_sw τ`.
pub fn telegraph_equivalent_t_phi1(delta_f10: f64, t_sw: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * delta_f10;
    2.0 / (w * w * t_sw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn telegraph_coherence_limits() {
        let (df, t_sw) = (469e3, 263e-9);
        let a = 2.0 * PI * df / 2f64.sqrt();
        // short idle: 1 − ⟨φ²⟩/2 with ⟨φ²⟩ = a²τ² for τ ≪ T_sw
        let tau = 1e-10;
        let phi2 = (a * tau).powi(2);
        assert!(rel(1.0 - telegraph_coherence(tau, df, t_sw).unwrap(), phi2 / 2.0) < 1e-3);
        // frozen fluctuator: cos(aτ)
        let tau = 300e-9;
        assert!((telegraph_coherence(tau, df, 1.0).unwrap() - (a * tau).cos()).abs() < 1e-6);
        // continuous across the critically damped point μ = 0
        let t_c = 1.0 / (2.0 * a);
        let c0 = telegraph_coherence(tau, df, t_c).unwrap();
        for t in [t_c * (1.0 - 1e-6), t_c * (1.0 + 1e-6)] {
            assert!((telegraph_coherence(tau, df, t).unwrap() - c0).abs() < 1e-6);
        }
        // Monte-Carlo value of ⟨cos φ⟩ for this row at 450 ns
        assert!((telegraph_coherence(450e-9, df, t_sw).unwrap() - 0.7485).abs() < 0.003);
        assert!(telegraph_coherence(1e-6, 0.0, t_sw).is_err());
    }

    #[test]
    fn white_examples() {
        assert_eq!(phi2_white(0.0, 1e-6).unwrap(), 0.0);
        assert!(rel(phi2_white(6.8e-6, 6.8e-6).unwrap(), 2.0) < 1e-15);
        assert!((phi2_white(1e-6, 6.8e-6).unwrap() - 0.2941).abs() < 1e-4);
        assert!(phi2_white(1e-6, 0.0).is_err());
        assert!(phi2_white(1e-6, -1.0).is_err());
    }

    #[test]
    fn corr_examples() {
        assert_eq!(phi2_corr(0.0, 1e-6, Filter::Ramsey).unwrap(), 0.0);
        assert!(rel(phi2_corr(2.8e-6, 2.8e-6, Filter::Ramsey).unwrap(), 2.0) < 1e-15);
        assert_eq!(phi2_corr(3e-6, 2.8e-6, Filter::Echo).unwrap(), 0.0);
        assert!(phi2_corr(1e-6, 0.0, Filter::Ramsey).is_err());
    }

    #[test]
    fn one_over_f_ratio_and_validity() {
        let (s, fc, tau) = (1e9, 1e3, 2e-6);
        let r = phi2_one_over_f(tau, s, fc, Filter::Ramsey).unwrap();
        let e = phi2_one_over_f(tau, s, fc, Filter::Echo).unwrap();
        let expected = (one_over_f_log_constant() / (fc * tau)).ln() / std::f64::consts::LN_2;
        assert!(rel(r / e, expected) < 1e-12);
        // f_c τ = 0.3 is outside the validity domain for Ramsey, but not for echo.
        let err = phi2_one_over_f(3e-4, s, 1e3, Filter::Ramsey).unwrap_err();
        assert!(err.to_string().contains("f_c·τ <= 0.2"), "{err}");
        assert!(phi2_one_over_f(3e-4, s, 1e3, Filter::Echo).is_ok());
    }

    #[test]
    fn one_over_f_log_factor_span_over_gate_times() {
        // f_c = 1/(10 min); the log factor drops by ln(450) ≈ 6.1 between 1 and 450 ns.
        let fc = 1.0 / 600.0;
        let c = one_over_f_log_constant();
        let lo = (c / (fc * 1e-9)).ln();
        let hi = (c / (fc * 450e-9)).ln();
        assert!(((lo - hi) - 450f64.ln()).abs() < 1e-12);
        assert!((lo - hi - 6.0).abs() < 0.2);
        assert!((c - 0.400_479_487).abs() < 1e-9);
    }

    #[test]
    fn telegraph_limits() {
        let (df, t_sw) = (479e3, 84e-9);
        let w = 2.0 * PI * df;
        for k in 1..=10 {
            let tau = t_sw / 100.0 * k as f64 / 10.0;
            let v = phi2_telegraph(tau, df, t_sw, Filter::Ramsey).unwrap();
            assert!(rel(v, w * w * tau * tau / 2.0) <= 0.01);
        }
        // The exact offset is (2πΔf)²T_sw², a fraction T_sw/(τ − T_sw) of the
        // variance: 1/99 at τ = 100·T_sw, so at the boundary it is 1% of the asymptote.
        let tau = 100.0 * t_sw;
        let v = phi2_telegraph(tau, df, t_sw, Filter::Ramsey).unwrap();
        let lin = w * w * t_sw * tau;
        assert!(((v - lin) / lin).abs() <= 0.01 + 1e-12);
        for k in [101.0, 300.0, 1e3, 1e4] {
            let tau = t_sw * k;
            let v = phi2_telegraph(tau, df, t_sw, Filter::Ramsey).unwrap();
            assert!(((v - w * w * t_sw * tau) / v).abs() <= 0.01);
        }
    }

    #[test]
    fn telegraph_series_matches_direct_form() {
        for x in [2e-3, 5e-3, 9.9e-3] {
            let direct_r = x - 1.0 + (-x as f64).exp();
            assert!(rel(ramsey_telegraph_shape(x), direct_r) < 1e-9);
            let direct_e = x - 3.0 - (-x as f64).exp() + 4.0 * (-0.5 * x as f64).exp();
            assert!(rel(echo_telegraph_shape(x), direct_e) < 1e-6);
        }
        // continuity across the switch-over point
        let below = ramsey_telegraph_shape(0.01 - 1e-12);
        let above = ramsey_telegraph_shape(0.01);
        assert!(rel(below, above) < 1e-9);
        let below = echo_telegraph_shape(0.01 - 1e-12);
        let above = echo_telegraph_shape(0.01);
        assert!(rel(below, above) < 1e-7);
    }

    #[test]
    fn rb_error_examples() {
        let p = NoiseModelParams::default().with_t1(26.7e-6);
        let r = rb_error_from_variance(&p, 40e-9, Filter::Ramsey).unwrap();
        assert!((r - 4.99e-4).abs() < 1e-6);
        let none = NoiseModelParams::default();
        assert_eq!(rb_error_from_variance(&none, 40e-9, Filter::Ramsey).unwrap(), 0.0);
        // Echo drops the correlated term only.
        let p = NoiseModelParams::default().with_white(10e-6).with_correlated(2e-6);
        let r = rb_error_from_variance(&p, 100e-9, Filter::Ramsey).unwrap();
        let e = rb_error_from_variance(&p, 100e-9, Filter::Echo).unwrap();
        assert!(rel(r - e, 2.0 * (0.05f64).powi(2) / 6.0) < 1e-12);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let p = NoiseModelParams { s_1f: Some(1.0), ..Default::default() };
        assert!(p.validate().is_err());
        let p = NoiseModelParams { t1: Some(-1.0), ..Default::default() };
        assert!(rb_error_from_variance(&p, 1e-8, Filter::Ramsey).is_err());
    }

    #[test]
    fn visibility_examples() {
        assert!((visibility_from_variance(0.0, 0.88, 0.015).unwrap() - 0.895).abs() < 1e-15);
        assert_eq!(visibility_from_variance(f64::INFINITY, 0.88, 0.015).unwrap(), 0.015);
        let v = visibility_from_variance(2.0, 0.88, 0.015).unwrap();
        assert!((v - 0.3387).abs() < 1e-4);
        assert!(visibility_from_variance(-0.1, 1.0, 0.0).is_err());
        let back = variance_from_visibility(v, 0.88, 0.015).unwrap();
        assert!(rel(back, 2.0) < 1e-12);
    }

    #[test]
    fn monotone_in_tau_and_echo_below_ramsey() {
        let taus: Vec<f64> = (1..=200).map(|k| k as f64 * 5e-9).collect();
        let mut prev = [0.0f64; 6];
        for &tau in &taus {
            let vals = [
                phi2_corr(tau, 2e-6, Filter::Ramsey).unwrap(),
                phi2_one_over_f(tau, 1e9, 1e2, Filter::Ramsey).unwrap(),
                phi2_telegraph(tau, 479e3, 84e-9, Filter::Ramsey).unwrap(),
                phi2_corr(tau, 2e-6, Filter::Echo).unwrap(),
                phi2_one_over_f(tau, 1e9, 1e2, Filter::Echo).unwrap(),
                phi2_telegraph(tau, 479e3, 84e-9, Filter::Echo).unwrap(),
            ];
            for (v, p) in vals.iter().zip(prev.iter()) {
                assert!(v >= p);
            }
            for k in 0..3 {
                assert!(vals[k + 3] <= vals[k]);
            }
            prev = vals;
        }
    }

    fn check_oracle(s: &SpectralDensity, taus: &[f64], filter: Filter, closed: impl Fn(f64) -> f64) {
        for &tau in taus {
            let q = phi2_from_spectrum(s, tau, filter).unwrap();
            let c = closed(tau);
            assert!(rel(q, c) <= 1e-5, "{} {:?} τ={tau}: quad {q} closed {c}", s.label(), filter);
        }
    }

    fn decades() -> Vec<f64> {
        (0..=12).map(|k| 1e-9 * 10f64.powf(k as f64 / 4.0)).collect()
    }

    #[test]
    fn quadrature_matches_white() {
        let s = SpectralDensity::white(20.6e-6).unwrap();
        for f in [Filter::Ramsey, Filter::Echo] {
            check_oracle(&s, &decades(), f, |t| phi2_white(t, 20.6e-6).unwrap());
        }
    }

    #[test]
    fn quadrature_matches_quasi_static_and_narrow_lorentzian() {
        let s = SpectralDensity::quasi_static(1.2e-6).unwrap();
        check_oracle(&s, &decades(), Filter::Ramsey, |t| phi2_corr(t, 1.2e-6, Filter::Ramsey).unwrap());
        assert_eq!(phi2_from_spectrum(&s, 1e-7, Filter::Echo).unwrap(), 0.0);
        // A very slow fluctuator approaches the quasi-static limit.
        let p = TelegraphParams::symmetric_from_effective(200e3, 1.0).unwrap();
        let s = SpectralDensity::telegraph(&p);
        let t_phi2 = telegraph_equivalent_t_phi2(200e3);
        let q = phi2_from_spectrum(&s, 1e-7, Filter::Ramsey).unwrap();
        assert!(rel(q, phi2_corr(1e-7, t_phi2, Filter::Ramsey).unwrap()) < 1e-5);
    }

    #[test]
    fn quadrature_matches_one_over_f() {
        let (s1f, fc) = (3e8, 1.0);
        let s = SpectralDensity::one_over_f(s1f, fc).unwrap();
        for f in [Filter::Ramsey, Filter::Echo] {
            check_oracle(&s, &decades(), f, |t| phi2_one_over_f(t, s1f, fc, f).unwrap());
        }
    }

    #[test]
    fn quadrature_matches_telegraph() {
        for (df, t_sw) in [(479e3, 84e-9), (184e3, 182e-6), (528e3, 32e-9)] {
            let p = TelegraphParams::symmetric_from_effective(df, t_sw).unwrap();
            let s = SpectralDensity::telegraph(&p);
            for f in [Filter::Ramsey, Filter::Echo] {
                check_oracle(&s, &decades(), f, |t| phi2_telegraph(t, df, t_sw, f).unwrap());
            }
        }
    }
}
