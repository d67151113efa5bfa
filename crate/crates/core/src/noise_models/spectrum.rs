use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Microscopic parameters of a two-level fluctuator coupled to the qubit.
///
/// The qubit frequency jumps between two levels separated by `delta_omega`
/// (rad/s). `gamma_up` is the rate of down→up switches and `gamma_down` the
/// rate of up→down switches, so the stationary probability of the up level
/// is `gamma_up / (gamma_up + gamma_down)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelegraphParams {
    pub gamma_up: f64,
    pub gamma_down: f64,
    pub delta_omega: f64,
}

impl TelegraphParams {
    pub fn new(gamma_up: f64, gamma_down: f64, delta_omega: f64) -> Result<Self> {
        for (name, v) in [("gamma_up", gamma_up), ("gamma_down", gamma_down), ("delta_omega", delta_omega)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(Self { gamma_up, gamma_down, delta_omega })
    }

    /// Symmetric fluctuator reproducing the effective pair `(Δf₁₀, T_sw)`:
    /// `Γ↑ = Γ↓ = 1/(2T_sw)` and `Δω = √2 · 2πΔf₁₀`, so that the detuning
    /// variance equals `(2πΔf₁₀)²/2`.
    pub fn symmetric_from_effective(delta_f10: f64, t_sw: f64) -> Result<Self> {
        if !(t_sw.is_finite() && t_sw > 0.0) {
            return Err(Error::domain(format!("t_sw must be finite and > 0, got {t_sw}")));
        }
        let rate = 0.5 / t_sw;
        Self::new(rate, rate, std::f64::consts::SQRT_2 * 2.0 * PI * delta_f10)
    }

    pub fn gamma_sum(&self) -> f64 {
        self.gamma_up + self.gamma_down
    }

    /// Correlation time `1/ΓΣ`.
    pub fn t_sw(&self) -> f64 {
        1.0 / self.gamma_sum()
    }

    /// Stationary probability of the up level.
    pub fn p_up(&self) -> f64 {
        self.gamma_up / self.gamma_sum()
    }

    /// Variance of the angular detuning, `Δω² Γ↑Γ↓/ΓΣ²`.
    pub fn variance(&self) -> f64 {
        let g = self.gamma_sum();
        self.delta_omega * self.delta_omega * self.gamma_up * self.gamma_down / (g * g)
    }

    /// Effective amplitude Δf₁₀ (Hz) with `(2πΔf₁₀)² = 2·variance`.
    pub fn effective_delta_f10(&self) -> f64 {
        (2.0 * self.variance()).sqrt() / (2.0 * PI)
    }

    /// Zero-mean detuning levels `(up, down)` in rad/s.
    pub fn levels(&self) -> (f64, f64) {
        let p_up = self.p_up();
        (self.delta_omega * (1.0 - p_up), -self.delta_omega * p_up)
    }
}

type DensityFn = dyn Fn(f64) -> f64 + Send + Sync;

/// Single-sided spectral density of the angular detuning, `S(ω)` in rad²/s,
/// with a continuous part supported on `[omega_min, omega_max]` and an
/// optional point mass at ω = 0 that represents quasi-static noise.
#[derive(Clone)]
pub struct SpectralDensity {
    label: String,
    density: Option<Arc<DensityFn>>,
    omega_min: f64,
    omega_max: f64,
    point_mass_variance: f64,
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralDensity")
            .field("label", &self.label)
            .field("omega_min", &self.omega_min)
            .field("omega_max", &self.omega_max)
            .field("point_mass_variance", &self.point_mass_variance)
            .finish()
    }
}

impl SpectralDensity {
    /// Arbitrary continuous density on `[omega_min, omega_max]`; `omega_max` may be infinite.
    pub fn new(
        label: impl Into<String>,
        density: impl Fn(f64) -> f64 + Send + Sync + 'static,
        omega_min: f64,
        omega_max: f64,
    ) -> Result<Self> {
        if !(omega_min >= 0.0 && omega_max > omega_min) || omega_min.is_infinite() {
            return Err(Error::domain(format!("invalid support [{omega_min}, {omega_max}]")));
        }
        Ok(Self {
            label: label.into(),
            density: Some(Arc::new(density)),
            omega_min,
            omega_max,
            point_mass_variance: 0.0,
        })
    }

    /// White detuning noise with `2τ/T_φ1` Ramsey variance: `S = 4/T_φ1`.
    pub fn white(t_phi1: f64) -> Result<Self> {
        if !(t_phi1.is_finite() && t_phi1 > 0.0) {
            return Err(Error::domain(format!("t_phi1 must be finite and > 0, got {t_phi1}")));
        }
        let s0 = 4.0 / t_phi1;
        Self::new("white", move |_| s0, 0.0, f64::INFINITY)
    }

    /// 1/f noise `s_1f/(ω/2π)` above the cutoff `2πf_c`.
    pub fn one_over_f(s_1f: f64, f_c: f64) -> Result<Self> {
        if !(s_1f.is_finite() && s_1f > 0.0 && f_c.is_finite() && f_c > 0.0) {
            return Err(Error::domain(format!("invalid 1/f parameters s_1f={s_1f}, f_c={f_c}")));
        }
        Self::new("1/f", move |w| s_1f * 2.0 * PI / w, 2.0 * PI * f_c, f64::INFINITY)
    }

    /// Lorentzian of a two-level fluctuator, `4Δω²Γ↑Γ↓ / (ΓΣ(ω² + ΓΣ²))`.
    pub fn telegraph(p: &TelegraphParams) -> Self {
        let g = p.gamma_sum();
        let amp = 4.0 * p.delta_omega * p.delta_omega * p.gamma_up * p.gamma_down / g;
        Self {
            label: "telegraph".into(),
            density: Some(Arc::new(move |w: f64| amp / (w * w + g * g))),
            omega_min: 0.0,
            omega_max: f64::INFINITY,
            point_mass_variance: 0.0,
        }
    }

    /// Static detuning with variance `2/T_φ2²`, so that the Ramsey variance is `2(τ/T_φ2)²`.
    pub fn quasi_static(t_phi2: f64) -> Result<Self> {
        if !(t_phi2.is_finite() && t_phi2 > 0.0) {
            return Err(Error::domain(format!("t_phi2 must be finite and > 0, got {t_phi2}")));
        }
        Ok(Self {
            label: "quasi-static".into(),
            density: None,
            omega_min: 0.0,
            omega_max: f64::INFINITY,
            point_mass_variance: 2.0 / (t_phi2 * t_phi2),
        })
    }

    /// Sum of several densities.
    pub fn sum(parts: &[SpectralDensity]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::domain("cannot sum an empty list of spectra"));
        }
        let continuous: Vec<SpectralDensity> = parts.iter().filter(|p| p.density.is_some()).cloned().collect();
        let omega_min = continuous.iter().map(|p| p.omega_min).fold(f64::INFINITY, f64::min);
        let omega_max = continuous.iter().map(|p| p.omega_max).fold(0.0, f64::max);
        let label = parts.iter().map(|p| p.label.as_str()).collect::<Vec<_>>().join("+");
        let point_mass_variance = parts.iter().map(|p| p.point_mass_variance).sum();
        let density: Option<Arc<DensityFn>> = if continuous.is_empty() {
            None
        } else {
            Some(Arc::new(move |w: f64| continuous.iter().map(|p| p.eval(w)).sum()))
        };
        Ok(Self {
            label,
            density,
            omega_min: if omega_min.is_finite() { omega_min } else { 0.0 },
            omega_max: if omega_max > 0.0 { omega_max } else { f64::INFINITY },
            point_mass_variance,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Continuous part at `omega` (zero outside the support).
    pub fn eval(&self, omega: f64) -> f64 {
        match &self.density {
            Some(f) if omega >= self.omega_min && omega <= self.omega_max => f(omega),
            _ => 0.0,
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.omega_min, self.omega_max)
    }

    pub fn has_continuous_part(&self) -> bool {
        self.density.is_some()
    }

    /// Variance carried by the point mass at ω = 0.
    pub fn point_mass_variance(&self) -> f64 {
        self.point_mass_variance
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_effective_round_trip() {
        let p = TelegraphParams::symmetric_from_effective(479e3, 84e-9).unwrap();
        assert!((p.t_sw() - 84e-9).abs() < 1e-20);
        assert!(((p.effective_delta_f10() - 479e3) / 479e3).abs() < 1e-12);
        let (up, down) = p.levels();
        assert!((up + down).abs() < 1e-6 * up);
        assert!((p.p_up() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn asymmetric_levels_have_zero_mean() {
        let p = TelegraphParams::new(1e6, 3e6, 2e6).unwrap();
        let (up, down) = p.levels();
        let mean = p.p_up() * up + (1.0 - p.p_up()) * down;
        assert!(mean.abs() < 1e-9);
        let var = p.p_up() * up * up + (1.0 - p.p_up()) * down * down;
        assert!(((var - p.variance()) / var).abs() < 1e-12);
        assert!(TelegraphParams::new(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn spectrum_support_and_sum() {
        let s = SpectralDensity::one_over_f(1e6, 10.0).unwrap();
        assert_eq!(s.eval(1.0), 0.0);
        assert!((s.eval(2.0 * PI * 100.0) - 1e4).abs() < 1e-9);
        let q = SpectralDensity::quasi_static(1e-6).unwrap();
        let w = SpectralDensity::white(1e-5).unwrap();
        let total = SpectralDensity::sum(&[s, q, w]).unwrap();
        assert!((total.point_mass_variance() - 2e12).abs() < 1.0);
        assert!((total.eval(2.0 * PI * 100.0) - (1e4 + 4e5)).abs() < 1e-6);
    }
}
