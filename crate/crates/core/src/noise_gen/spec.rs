use rand::Rng;
use serde::{Deserialize, Serialize};

use super::generators::{
    gen_one_over_f_trace_with, gen_quasistatic, gen_summed_telegraph_one_over_f, gen_telegraph_trace,
    gen_white_phase, OneOverFOptions,
};
use super::{FrequencyTrace, RngStream};
use crate::error::{Error, Result};
use crate::noise_models::{NoiseModelParams, TelegraphParams};

fn default_ratio() -> f64 {
    1.0
}

/// Telegraph component in the effective parameterisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TelegraphNoise {
    /// Switching time `1/ΓΣ` (s).
    pub t_sw: f64,
    /// Effective amplitude (Hz), `(2πΔf₁₀)² = 2·Var(δω)`.
    pub delta_f10: f64,
    /// `Γ↑/Γ↓`; 1 for the symmetric fluctuator.
    #[serde(default = "default_ratio")]
    pub up_down_ratio: f64,
}

impl TelegraphNoise {
    pub fn params(&self) -> Result<TelegraphParams> {
        let a = self.up_down_ratio;
        if !(a.is_finite() && a > 0.0 && self.t_sw > 0.0 && self.delta_f10 > 0.0) {
            return Err(Error::domain("telegraph noise needs t_sw, delta_f10, up_down_ratio > 0"));
        }
        let gamma_sum = 1.0 / self.t_sw;
        let gamma_up = gamma_sum * a / (1.0 + a);
        let gamma_down = gamma_sum / (1.0 + a);
        // Var = Δω² a/(1+a)² = (2πΔf)²/2
        let w = 2.0 * std::f64::consts::PI * self.delta_f10;
        let delta_omega = w * (1.0 + a) / (2.0 * a).sqrt();
        TelegraphParams::new(gamma_up, gamma_down, delta_omega)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum OneOverFGenerator {
    /// Inverse-FFT harmonic sum on a periodic grid.
    #[default]
    Harmonic,
    /// Sum of telegraph fluctuators with log-uniform rates (cross-check only).
    SummedTelegraph { fluctuators: usize },
}

/// 1/f component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OneOverFNoise {
    /// Strength in `S(ω) = s_1f/(ω/2π)` (rad²/s).
    pub s_1f: f64,
    /// Low cutoff (Hz).
    pub f_c: f64,
    /// High cutoff of the synthesis (Hz).
    pub f_max: f64,
    /// Grid step (s); defaults to `min(1 ns, 1/(2 f_max))`.
    #[serde(default)]
    pub dt: Option<f64>,
    #[serde(default)]
    pub generator: OneOverFGenerator,
}

/// Which noise processes act on the qubit, in generator form.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Energy relaxation time (s), applied as amplitude damping.
    #[serde(default)]
    pub t1: Option<f64>,
    /// White dephasing time T_φ1 (s).
    #[serde(default)]
    pub t_phi1: Option<f64>,
    /// Quasi-static dephasing time T_φ2 (s); `σ = √2/T_φ2`.
    #[serde(default)]
    pub t_phi2: Option<f64>,
    #[serde(default)]
    pub telegraph: Option<TelegraphNoise>,
    #[serde(default)]
    pub one_over_f: Option<OneOverFNoise>,
    /// Fixed detuning (Hz) added to every realization.
    #[serde(default)]
    pub static_detuning_hz: Option<f64>,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        let mut positive = |name: &str, v: Option<f64>| {
            if let Some(v) = v {
                if !(v.is_finite() && v > 0.0) {
                    problems.push(format!("noise.{name} must be finite and > 0, got {v}"));
                }
            }
        };
        positive("t1", self.t1);
        positive("t_phi1", self.t_phi1);
        positive("t_phi2", self.t_phi2);
        if let Some(t) = &self.telegraph {
            positive("telegraph.t_sw", Some(t.t_sw));
            positive("telegraph.delta_f10", Some(t.delta_f10));
            positive("telegraph.up_down_ratio", Some(t.up_down_ratio));
        }
        if let Some(o) = &self.one_over_f {
            positive("one_over_f.s_1f", Some(o.s_1f));
            positive("one_over_f.f_c", Some(o.f_c));
            positive("one_over_f.f_max", Some(o.f_max));
            positive("one_over_f.dt", o.dt);
            if o.f_max <= o.f_c {
                problems.push(format!("noise.one_over_f.f_max ({}) must exceed f_c ({})", o.f_max, o.f_c));
            }
            if let OneOverFGenerator::SummedTelegraph { fluctuators: 0 } = o.generator {
                problems.push("noise.one_over_f.generator.fluctuators must be > 0".into());
            }
        }
        if let Some(d) = self.static_detuning_hz {
            if !d.is_finite() {
                problems.push("noise.static_detuning_hz must be finite".into());
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }

    /// Closed-form parameters describing the same noise (the static detuning has no counterpart).
    pub fn model_params(&self) -> NoiseModelParams {
        NoiseModelParams {
            t1: self.t1,
            t_phi1: self.t_phi1,
            t_phi2: self.t_phi2,
            s_1f: self.one_over_f.map(|o| o.s_1f),
            f_c: self.one_over_f.map(|o| o.f_c),
            t_sw: self.telegraph.map(|t| t.t_sw),
            delta_f10: self.telegraph.map(|t| t.delta_f10),
        }
    }

    /// True when no dephasing process is present (T₁ may still be set).
    pub fn is_dephasing_free(&self) -> bool {
        self.t_phi1.is_none()
            && self.t_phi2.is_none()
            && self.telegraph.is_none()
            && self.one_over_f.is_none()
            && self.static_detuning_hz.is_none()
    }

    /// Draws one realization covering `[0, duration]` from `stream`.
    pub fn realize(&self, duration: f64, stream: RngStream) -> Result<NoiseRealization> {
        let duration = duration.max(f64::MIN_POSITIVE);
        let mut parts = Vec::new();
        if let Some(d) = self.static_detuning_hz {
            parts.push(FrequencyTrace::constant(2.0 * std::f64::consts::PI * d, duration));
        }
        if let Some(t_phi2) = self.t_phi2 {
            let mut rng = stream.child(1).rng();
            parts.push(gen_quasistatic(std::f64::consts::SQRT_2 / t_phi2, duration, &mut rng));
        }
        if let Some(t) = &self.telegraph {
            let mut rng = stream.child(2).rng();
            parts.push(gen_telegraph_trace(&t.params()?, duration, &mut rng)?);
        }
        if let Some(o) = &self.one_over_f {
            let mut rng = stream.child(3).rng();
            parts.push(match o.generator {
                OneOverFGenerator::Harmonic => {
                    let opts = OneOverFOptions { dt: o.dt, ..Default::default() };
                    gen_one_over_f_trace_with(o.s_1f, o.f_c, o.f_max, duration, opts, &mut rng)?
                }
                OneOverFGenerator::SummedTelegraph { fluctuators } => {
                    gen_summed_telegraph_one_over_f(o.s_1f, o.f_c, o.f_max, fluctuators, duration, &mut rng)?
                }
            });
        }
        let trace = match parts.len() {
            0 => FrequencyTrace::zero(duration),
            1 => parts.pop().expect("one part"),
            _ => FrequencyTrace::sum(parts)?,
        };
        Ok(NoiseRealization { trace, t_phi1: self.t_phi1 })
    }
}

/// One draw of the noise: a detuning trace plus, if present, white noise whose
/// increments are drawn on demand.
#[derive(Debug, Clone)]
pub struct NoiseRealization {
    pub trace: FrequencyTrace,
    pub t_phi1: Option<f64>,
}

impl NoiseRealization {
    /// Phase accumulated over `[t0, t1]`; white-noise increments come from `rng`,
    /// so disjoint intervals receive independent white contributions.
    pub fn phase<R: Rng + ?Sized>(&self, t0: f64, t1: f64, rng: &mut R) -> Result<f64> {
        let mut phi = super::integrate_phase(&self.trace, t0, t1)?;
        if let Some(t_phi1) = self.t_phi1 {
            phi += gen_white_phase(t1 - t0, t_phi1, rng);
        }
        Ok(phi)
    }
}
