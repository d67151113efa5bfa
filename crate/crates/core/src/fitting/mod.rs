//! Levenberg–Marquardt engine, the concrete noise models fitted to measured
//! curves, and the per-mechanism error budget.

mod lm;
mod models;

pub use lm::{fit_auto, fit_nonlinear, numeric_gradient, FitData, FitModel, FitOptions, FitReport, Transform};
pub use models::{
    DecayModel, ExpDecayModel, FluxPsdModel, FLUX_ALPHA_RANGE, IdleErrorModel, PhaseRelation, PowerSeriesModel, Terms,
    VisibilityModel,
};

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise_models::{self, Filter, IdleErrorTerms, NoiseModelParams};

/// Fits above this condition number are flagged as not identifiable.
pub const IDENTIFIABILITY_CONDITION_LIMIT: f64 = 1e10;

/// Short- and long-time asymptotes of the T₁ + telegraph idle error:
/// `τ/3T₁ + (2πΔf₁₀τ)²/12` and `τ/3T₁ + (2πΔf₁₀)² T_sw (τ − T_sw)/6`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TelegraphAsymptotes {
    pub t1: f64,
    pub t_sw: f64,
    pub delta_f10: f64,
}

impl TelegraphAsymptotes {
    pub fn short_time(&self, tau: f64) -> f64 {
        let w = 2.0 * PI * self.delta_f10;
        tau / (3.0 * self.t1) + (w * tau).powi(2) / 12.0
    }

    pub fn long_time(&self, tau: f64) -> f64 {
        let w = 2.0 * PI * self.delta_f10;
        tau / (3.0 * self.t1) + w * w * self.t_sw * (tau - self.t_sw) / 6.0
    }
}

/// Result of fitting T₁ (fixed) plus telegraph noise to an idle-error curve.
#[derive(Debug, Clone, PartialEq)]
pub struct TelegraphFit {
    pub report: FitReport,
    pub asymptotes: TelegraphAsymptotes,
}

impl TelegraphFit {
    pub fn t_sw(&self) -> (f64, f64) {
        self.report.param("t_sw").unwrap_or((f64::NAN, f64::NAN))
    }

    pub fn delta_f10(&self) -> (f64, f64) {
        self.report.param("delta_f10").unwrap_or((f64::NAN, f64::NAN))
    }
}

/// Fits `r(τ) = τ/3T₁ + ⟨φ²_tel(τ)⟩/6` with T₁ held at the supplied value.
pub fn fit_telegraph_model(data: &FitData, t1: f64) -> Result<TelegraphFit> {
    if !(t1 > 0.0) {
        return Err(noise_models_domain("t1 must be > 0"));
    }
    let model = IdleErrorModel::new(Terms::TELEGRAPH, Some(t1), Filter::Ramsey);
    let report = fit_auto(&model, data, &FitOptions::default())?;
    let asymptotes = TelegraphAsymptotes { t1, t_sw: report.value("t_sw"), delta_f10: report.value("delta_f10") };
    Ok(TelegraphFit { report, asymptotes })
}

fn noise_models_domain(msg: &str) -> Error {
    Error::Domain(msg.to_string())
}

/// Result of fitting a combination of dephasing terms.
#[derive(Debug, Clone, PartialEq)]
pub struct FullModelFit {
    pub report: FitReport,
    /// False when the covariance is too ill-conditioned for the chosen subset.
    pub identifiable: bool,
    /// When the fitted switching time far exceeds the longest idle, the
    /// telegraph reduces to quasi-static noise; this is its correlated-noise
    /// equivalent `T_φ2 = 2/(2πΔf₁₀)`.
    pub correlated_equivalent_t_phi2: Option<f64>,
}

/// Fits the selected terms of `r(τ) = τ/3T₁ + ⟨φ²⟩/6`, T₁ fixed (or absent).
pub fn fit_full_model(data: &FitData, terms: Terms, t1: Option<f64>, filter: Filter) -> Result<FullModelFit> {
    fit_idle_model(&IdleErrorModel::new(terms, t1, filter), data)
}

/// Fits an idle-error model as configured (terms, T₁, filter, phase relation).
pub fn fit_idle_model(model: &IdleErrorModel, data: &FitData) -> Result<FullModelFit> {
    let terms = model.terms;
    if terms == Terms::default() {
        return Err(Error::Fit("no dephasing term selected".into()));
    }
    let report = fit_auto(model, data, &FitOptions::default())?;
    let identifiable = report.condition_number.is_finite() && report.condition_number < IDENTIFIABILITY_CONDITION_LIMIT;
    let tau_max = data.x.iter().cloned().fold(0.0, f64::max);
    let correlated_equivalent_t_phi2 = (terms.telegraph && report.value("t_sw") > 10.0 * tau_max)
        .then(|| noise_models::telegraph_equivalent_t_phi2(report.value("delta_f10")));
    Ok(FullModelFit { report, identifiable, correlated_equivalent_t_phi2 })
}

/// Fits `A·exp(−t/T_φ1 − (t/T_φ2)²) + B` to a visibility curve.
pub fn fit_visibility(data: &FitData) -> Result<FitReport> {
    if data.len() < 5 {
        return Err(Error::Fit("visibility fit needs at least 5 points".into()));
    }
    fit_auto(&VisibilityModel, data, &FitOptions::default())
}

/// Fits `A·e^{−t/T₁} + B` to an excited-state population curve.
pub fn fit_t1(data: &FitData) -> Result<FitReport> {
    fit_auto(&ExpDecayModel, data, &FitOptions::default())
}

/// Aliased 1/f + white flux-noise fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxPsdFit {
    pub report: FitReport,
    pub model: FluxPsdModel,
}

impl FluxPsdFit {
    /// The fitted 1/f line `S*/f^α` alone, e.g. extrapolated down to 1 Hz.
    pub fn one_over_f_line(&self, f: f64) -> f64 {
        self.report.value("s_star") * f.powf(-self.report.value("alpha"))
    }

    /// Full fitted spectrum including the aliased and white parts.
    pub fn spectrum(&self, f: f64) -> f64 {
        self.model.spectrum(&self.report.params, f)
    }
}

/// Fits `S*/f^α + S*/(2f_n − f)^α + S_white` to a PSD estimate, in log space
/// so every decade carries comparable weight. Frequencies must lie in `(0, f_n]`.
pub fn fit_flux_noise_psd(freqs: &[f64], psd: &[f64], f_n: f64) -> Result<FluxPsdFit> {
    if !(f_n > 0.0) {
        return Err(Error::Domain("Nyquist frequency must be > 0".into()));
    }
    if freqs.iter().any(|&f| !(f > 0.0 && f <= f_n * (1.0 + 1e-12))) {
        return Err(Error::Domain("PSD frequencies must lie in (0, f_n]".into()));
    }
    if psd.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::Domain("PSD values must be > 0".into()));
    }
    let data = FitData::new(freqs.to_vec(), psd.iter().map(|s| s.ln()).collect(), None)?;
    let model = FluxPsdModel { f_n };
    let report = fit_auto(&model, &data, &FitOptions::default())?;
    Ok(FluxPsdFit { report, model })
}

/// Converts a flux-noise amplitude `S*_Φ` in (µΦ₀)² (single-sided, per Hz at
/// 1 Hz) and a slope `df/dΦ` in Hz/Φ₀ into the 1/f strength `s_1f` used by the
/// phase-variance formulas: `s_1f = (2π)² (df/dΦ)² S*_Φ · 10⁻¹²`, i.e. the
/// angular-frequency noise density is `s_1f / f` per Hz.
pub fn flux_to_phase_strength(s_star_phi: f64, dfdphi: f64) -> f64 {
    (2.0 * PI * dfdphi).powi(2) * s_star_phi * 1e-12
}

/// Per-mechanism idle error at one duration, for both filters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorBudget {
    pub tau: f64,
    pub ramsey: IdleErrorTerms,
    pub echo: IdleErrorTerms,
}

impl ErrorBudget {
    pub fn ramsey_total(&self) -> f64 {
        self.ramsey.total()
    }

    pub fn echo_total(&self) -> f64 {
        self.echo.total()
    }

    /// CSV table with one row per mechanism.
    pub fn to_csv(&self) -> String {
        let rows = [
            ("t1", self.ramsey.t1, self.echo.t1),
            ("white", self.ramsey.white, self.echo.white),
            ("correlated", self.ramsey.correlated, self.echo.correlated),
            ("one_over_f", self.ramsey.one_over_f, self.echo.one_over_f),
            ("telegraph", self.ramsey.telegraph, self.echo.telegraph),
            ("total", Some(self.ramsey_total()), Some(self.echo_total())),
        ];
        let mut s = String::from("component,tau_s,ramsey_error,echo_error\n");
        for (name, r, e) in rows {
            let (r, e) = (r.unwrap_or(0.0), e.unwrap_or(0.0));
            s.push_str(&format!("{name},{:.16e},{r:.16e},{e:.16e}\n", self.tau));
        }
        s
    }
}

/// Error budget at idle duration `tau`.
pub fn error_budget(p: &NoiseModelParams, tau: f64) -> Result<ErrorBudget> {
    Ok(ErrorBudget {
        tau,
        ramsey: noise_models::idle_error_terms(p, tau, Filter::Ramsey)?,
        echo: noise_models::idle_error_terms(p, tau, Filter::Echo)?,
    })
}

/// Gate families of the gate-duration study. Idle-like gates carry a quadratic
/// (correlated) term, the echoed ones are linear only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GateFamily {
    I,
    XX,
    Z,
    YX,
}

impl GateFamily {
    pub const ALL: [GateFamily; 4] = [GateFamily::I, GateFamily::XX, GateFamily::Z, GateFamily::YX];

    pub fn has_quadratic_term(self) -> bool {
        matches!(self, GateFamily::I | GateFamily::Z)
    }

    pub fn label(self) -> &'static str {
        match self {
            GateFamily::I => "I",
            GateFamily::XX => "XX",
            GateFamily::Z => "Z",
            GateFamily::YX => "YX",
        }
    }
}

/// Linear (and for I/Z quadratic) coefficients of gate error vs duration; no offset.
#[derive(Debug, Clone, PartialEq)]
pub struct GateErrorFit {
    pub family: GateFamily,
    pub report: FitReport,
}

impl GateErrorFit {
    pub fn linear(&self) -> (f64, f64) {
        self.report.param("linear").unwrap_or((f64::NAN, f64::NAN))
    }

    pub fn quadratic(&self) -> Option<(f64, f64)> {
        self.report.param("quadratic")
    }
}

pub fn fit_gate_error_vs_duration(family: GateFamily, data: &FitData) -> Result<GateErrorFit> {
    let model = if family.has_quadratic_term() {
        PowerSeriesModel::new(&[1, 2], &["linear", "quadratic"])
    } else {
        PowerSeriesModel::new(&[1], &["linear"])
    };
    let report = fit_auto(&model, data, &FitOptions::default())?;
    Ok(GateErrorFit { family, report })
}

/// CSV of data against a fitted model: `x,y,yerr,model,residual`.
pub fn residuals_csv<M: FitModel + ?Sized>(model: &M, report: &FitReport, data: &FitData) -> String {
    let mut s = String::from("x,y,yerr,model,residual\n");
    for i in 0..data.len() {
        let m = model.predict(&report.params, data.x[i]);
        let e = data.sigma.as_ref().map_or(0.0, |v| v[i]);
        s.push_str(&format!("{:.16e},{:.16e},{e:.16e},{m:.16e},{:.16e}\n", data.x[i], data.y[i], data.y[i] - m));
    }
    s
}
