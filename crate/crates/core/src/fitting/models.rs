use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::lm::{FitData, FitModel, Transform};
use crate::noise_models::{self, telegraph_shape, telegraph_shape_derivative, Filter};

/// Ordinary least-squares polynomial fit `y ≈ Σ c_k x^{p_k}`, used for initial guesses.
pub(crate) fn linear_lsq(x: &[f64], y: &[f64], w: &[f64], powers: &[i32]) -> Option<Vec<f64>> {
    let n = powers.len();
    let a = nalgebra::DMatrix::from_fn(x.len(), n, |i, k| x[i].powi(powers[k]) * w[i]);
    let b = nalgebra::DVector::from_iterator(x.len(), y.iter().zip(w).map(|(v, wi)| v * wi));
    let svd = a.svd(true, true);
    let sol = svd.solve(&b, 1e-14).ok()?;
    let v: Vec<f64> = sol.iter().copied().collect();
    v.iter().all(|c| c.is_finite()).then_some(v)
}

fn weights(data: &FitData) -> Vec<f64> {
    match &data.sigma {
        Some(s) => s.iter().map(|v| 1.0 / v).collect(),
        None => vec![1.0; data.len()],
    }
}

/// RB decay `F(m) = A·p^m + B`.
#[derive(Debug, Clone, Copy, Default)]
pub struct DecayModel;

impl FitModel for DecayModel {
    fn name(&self) -> String {
        "rb_decay: A*p^m + B".into()
    }
    fn param_names(&self) -> Vec<String> {
        vec!["A".into(), "p".into(), "B".into()]
    }
    fn transforms(&self) -> Vec<Transform> {
        vec![Transform::Identity, Transform::OneMinusLog, Transform::Identity]
    }
    fn predict(&self, t: &[f64], m: f64) -> f64 {
        t[0] * t[1].powf(m) + t[2]
    }
    fn gradient(&self, t: &[f64], m: f64) -> Option<Vec<f64>> {
        let pm = t[1].powf(m);
        let dp = if m == 0.0 { 0.0 } else { t[0] * m * t[1].powf(m - 1.0) };
        Some(vec![pm, dp, 1.0])
    }
    fn initial_guess(&self, data: &FitData) -> Vec<f64> {
        let b = 0.5;
        let pts: Vec<(f64, f64)> = data
            .x
            .iter()
            .zip(&data.y)
            .filter(|(_, &y)| y - b > 1e-6)
            .map(|(&m, &y)| (m, (y - b).ln()))
            .collect();
        if pts.len() >= 2 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            if let Some(c) = linear_lsq(&xs, &ys, &vec![1.0; xs.len()], &[0, 1]) {
                let p = c[1].exp().min(1.0 - 1e-9);
                return vec![c[0].exp(), p, b];
            }
        }
        vec![0.5, 0.99, b]
    }
}

/// Which mechanisms an idle-error model includes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Terms {
    #[serde(default)]
    pub white: bool,
    #[serde(default)]
    pub correlated: bool,
    #[serde(default)]
    pub one_over_f: bool,
    #[serde(default)]
    pub telegraph: bool,
}

impl Terms {
    pub const TELEGRAPH: Terms = Terms { white: false, correlated: false, one_over_f: false, telegraph: true };
    pub const WHITE_TELEGRAPH: Terms = Terms { white: true, correlated: false, one_over_f: false, telegraph: true };
    pub const WHITE_CORRELATED: Terms = Terms { white: true, correlated: true, one_over_f: false, telegraph: false };
}

/// How the idle error follows from the phase statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseRelation {
    /// `r = τ/3T₁ + ⟨φ²⟩/6`, the small-angle limit.
    #[default]
    SmallAngle,
    /// Exact Clifford-twirled error `r = (2 + γ − 2√(1−γ)·⟨cos φ⟩)/6` with
    /// `γ = 1 − e^{−τ/T₁}`. The Ramsey telegraph coherence is exact; the other
    /// terms and the echoed telegraph use the Gaussian `e^{−⟨φ²⟩/2}`.
    Twirled,
}

/// Idle error `r(τ) = τ/3T₁ + ⟨φ²(τ)⟩/6` (or its twirled form) with the
/// selected dephasing terms; T₁ (if given) and the 1/f cutoff are held fixed.
/// Free parameters, in order: `t_phi1`, `t_phi2`, `s_1f`, `t_sw`, `delta_f10`,
/// each present only if selected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IdleErrorModel {
    pub terms: Terms,
    pub t1: Option<f64>,
    pub f_c: f64,
    pub filter: Filter,
    pub relation: PhaseRelation,
}

#[derive(Clone, Copy)]
enum Slot {
    White,
    Correlated,
    OneOverF,
    TSw,
    DeltaF,
}

impl IdleErrorModel {
    pub fn new(terms: Terms, t1: Option<f64>, filter: Filter) -> Self {
        Self { terms, t1, f_c: 1.0 / 600.0, filter, relation: PhaseRelation::SmallAngle }
    }

    pub fn with_relation(self, relation: PhaseRelation) -> Self {
        Self { relation, ..self }
    }

    fn slots(&self) -> Vec<Slot> {
        let mut s = Vec::new();
        if self.terms.white {
            s.push(Slot::White);
        }
        if self.terms.correlated {
            s.push(Slot::Correlated);
        }
        if self.terms.one_over_f {
            s.push(Slot::OneOverF);
        }
        if self.terms.telegraph {
            s.push(Slot::TSw);
            s.push(Slot::DeltaF);
        }
        s
    }

    fn find(&self, t: &[f64], want: fn(&Slot) -> bool) -> Option<f64> {
        self.slots().iter().position(want).map(|i| t[i])
    }

    /// `⟨φ²⟩` of the dephasing part (without T₁).
    pub fn phi2(&self, t: &[f64], tau: f64) -> f64 {
        let mut v = 0.0;
        if let Some(tp) = self.find(t, |s| matches!(s, Slot::White)) {
            v += 2.0 * tau / tp;
        }
        if let Some(tp) = self.find(t, |s| matches!(s, Slot::Correlated)) {
            if self.filter == Filter::Ramsey {
                v += 2.0 * (tau / tp).powi(2);
            }
        }
        if let Some(s) = self.find(t, |s| matches!(s, Slot::OneOverF)) {
            v += noise_models::phi2_one_over_f(tau, s, self.f_c, self.filter).unwrap_or(f64::NAN);
        }
        if let (Some(t_sw), Some(df)) =
            (self.find(t, |s| matches!(s, Slot::TSw)), self.find(t, |s| matches!(s, Slot::DeltaF)))
        {
            let w = 2.0 * PI * df;
            v += w * w * t_sw * t_sw * telegraph_shape(tau / t_sw, self.filter);
        }
        v
    }

    /// `⟨cos φ⟩` of the dephasing part, terms taken as independent.
    pub fn coherence(&self, t: &[f64], tau: f64) -> f64 {
        let mut c = 1.0;
        if let Some(tp) = self.find(t, |s| matches!(s, Slot::White)) {
            c *= (-tau / tp).exp();
        }
        if let Some(tp) = self.find(t, |s| matches!(s, Slot::Correlated)) {
            if self.filter == Filter::Ramsey {
                c *= (-(tau / tp).powi(2)).exp();
            }
        }
        if let Some(s) = self.find(t, |s| matches!(s, Slot::OneOverF)) {
            c *= (-0.5 * noise_models::phi2_one_over_f(tau, s, self.f_c, self.filter).unwrap_or(f64::NAN)).exp();
        }
        if let (Some(t_sw), Some(df)) =
            (self.find(t, |s| matches!(s, Slot::TSw)), self.find(t, |s| matches!(s, Slot::DeltaF)))
        {
            c *= match self.filter {
                Filter::Ramsey => noise_models::telegraph_coherence(tau, df, t_sw).unwrap_or(f64::NAN),
                Filter::Echo => {
                    let w = 2.0 * PI * df;
                    (-0.5 * w * w * t_sw * t_sw * telegraph_shape(tau / t_sw, self.filter)).exp()
                }
            };
        }
        c
    }

    fn t1_term(&self, tau: f64) -> f64 {
        self.t1.map_or(0.0, |t1| tau / (3.0 * t1))
    }
}

fn regress_tail(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let n = x.len();
    let start = n - (n / 3).max(3).min(n);
    let c = linear_lsq(&x[start..], &y[start..], &vec![1.0; n - start], &[0, 1])?;
    Some((c[0], c[1]))
}

impl FitModel for IdleErrorModel {
    fn name(&self) -> String {
        let mut parts = Vec::new();
        if self.t1.is_some() {
            parts.push("T1(fixed)");
        }
        if self.terms.white {
            parts.push("white");
        }
        if self.terms.correlated {
            parts.push("correlated");
        }
        if self.terms.one_over_f {
            parts.push("1/f");
        }
        if self.terms.telegraph {
            parts.push("telegraph");
        }
        let f = match self.filter {
            Filter::Ramsey => "ramsey",
            Filter::Echo => "echo",
        };
        let relation = match self.relation {
            PhaseRelation::SmallAngle => "",
            PhaseRelation::Twirled => " (twirled)",
        };
        format!("idle_error[{f}]: {}{relation}", parts.join(" + "))
    }
    fn param_names(&self) -> Vec<String> {
        self.slots()
            .iter()
            .map(|s| match s {
                Slot::White => "t_phi1",
                Slot::Correlated => "t_phi2",
                Slot::OneOverF => "s_1f",
                Slot::TSw => "t_sw",
                Slot::DeltaF => "delta_f10",
            })
            .map(String::from)
            .collect()
    }
    fn transforms(&self) -> Vec<Transform> {
        vec![Transform::Log; self.slots().len()]
    }
    fn predict(&self, t: &[f64], tau: f64) -> f64 {
        match self.relation {
            PhaseRelation::SmallAngle => self.t1_term(tau) + self.phi2(t, tau) / 6.0,
            PhaseRelation::Twirled => {
                let g = self.t1.map_or(0.0, |t1| -(-tau / t1).exp_m1());
                (2.0 + g - 2.0 * (1.0 - g).sqrt() * self.coherence(t, tau)) / 6.0
            }
        }
    }
    fn gradient(&self, t: &[f64], tau: f64) -> Option<Vec<f64>> {
        if self.relation == PhaseRelation::Twirled {
            return None;
        }
        let slots = self.slots();
        let t_sw = self.find(t, |s| matches!(s, Slot::TSw));
        let df = self.find(t, |s| matches!(s, Slot::DeltaF));
        let g = slots
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let d = match s {
                    Slot::White => -2.0 * tau / (t[i] * t[i]),
                    Slot::Correlated => match self.filter {
                        Filter::Ramsey => -4.0 * tau * tau / t[i].powi(3),
                        Filter::Echo => 0.0,
                    },
                    Slot::OneOverF => {
                        noise_models::phi2_one_over_f(tau, 1.0, self.f_c, self.filter).unwrap_or(f64::NAN)
                    }
                    Slot::TSw => {
                        let (ts, w) = (t_sw.unwrap_or(1.0), 2.0 * PI * df.unwrap_or(0.0));
                        let x = tau / ts;
                        w * w * (2.0 * ts * telegraph_shape(x, self.filter)
                            - tau * telegraph_shape_derivative(x, self.filter))
                    }
                    Slot::DeltaF => {
                        let (ts, f) = (t_sw.unwrap_or(1.0), df.unwrap_or(0.0));
                        let w = 2.0 * PI;
                        2.0 * w * w * f * ts * ts * telegraph_shape(tau / ts, self.filter)
                    }
                };
                d / 6.0
            })
            .collect();
        Some(g)
    }
    fn initial_guess(&self, data: &FitData) -> Vec<f64> {
        let x = &data.x;
        let y: Vec<f64> = x.iter().zip(&data.y).map(|(&tau, &r)| 6.0 * (r - self.t1_term(tau))).collect();
        let tau_max = x.iter().cloned().fold(0.0, f64::max).max(1e-12);
        let y_max = y.iter().cloned().fold(0.0, f64::max).max(1e-12);
        // long-time line y ≈ slope·(τ − knee)
        let (mut slope, mut knee) = regress_tail(x, &y)
            .map(|(c0, c1)| (c1, if c1 > 0.0 { -c0 / c1 } else { f64::NAN }))
            .unwrap_or((f64::NAN, f64::NAN));
        if !(slope > 0.0) {
            slope = y_max / tau_max;
        }
        if !(knee > 0.0 && knee < tau_max) {
            knee = 0.3 * tau_max;
        }
        let share = if self.terms.white && self.terms.telegraph { 0.3 } else { 1.0 };
        let n_dephasing = [self.terms.white, self.terms.correlated, self.terms.one_over_f, self.terms.telegraph]
            .iter()
            .filter(|&&b| b)
            .count()
            .max(1) as f64;
        self.slots()
            .iter()
            .map(|s| match s {
                Slot::White => 2.0 / (share * slope),
                Slot::Correlated => {
                    let q = y_max / n_dephasing;
                    tau_max * (2.0 / q).sqrt()
                }
                Slot::OneOverF => {
                    let l = noise_models::phi2_one_over_f(tau_max, 1.0, self.f_c, self.filter).unwrap_or(1.0);
                    y_max / n_dephasing / l
                }
                Slot::TSw => knee,
                Slot::DeltaF => {
                    let tel_slope = if self.terms.white { (1.0 - share) * slope } else { slope };
                    (tel_slope / knee).sqrt() / (2.0 * PI)
                }
            })
            .collect()
    }
}

/// Ramsey/echo envelope `A·exp(−t/T_φ1 − (t/T_φ2)²) + B`.
#[derive(Debug, Clone, Copy, Default)]
pub struct VisibilityModel;

impl FitModel for VisibilityModel {
    fn name(&self) -> String {
        "visibility: A*exp(-t/T_phi1 - (t/T_phi2)^2) + B".into()
    }
    fn param_names(&self) -> Vec<String> {
        ["t_phi1", "t_phi2", "a", "b"].map(String::from).to_vec()
    }
    fn transforms(&self) -> Vec<Transform> {
        vec![Transform::Log, Transform::Log, Transform::Log, Transform::Identity]
    }
    fn predict(&self, p: &[f64], t: f64) -> f64 {
        p[2] * (-t / p[0] - (t / p[1]).powi(2)).exp() + p[3]
    }
    fn gradient(&self, p: &[f64], t: f64) -> Option<Vec<f64>> {
        let e = (-t / p[0] - (t / p[1]).powi(2)).exp();
        Some(vec![p[2] * e * t / (p[0] * p[0]), p[2] * e * 2.0 * t * t / p[1].powi(3), e, 1.0])
    }
    fn initial_guess(&self, data: &FitData) -> Vec<f64> {
        let y_max = data.y.iter().cloned().fold(f64::MIN, f64::max);
        let y_min = data.y.iter().cloned().fold(f64::MAX, f64::min);
        let t_max = data.x.iter().cloned().fold(0.0, f64::max).max(1e-12);
        let b = if y_min < 0.3 * y_max { 0.9 * y_min } else { 0.0 };
        let a0 = y_max - b;
        let pts: Vec<(f64, f64)> = data
            .x
            .iter()
            .zip(&data.y)
            .filter(|(_, &y)| y - b > 0.05 * a0)
            .map(|(&t, &y)| (t, (y - b).ln()))
            .collect();
        let (mut t1, mut t2, mut a) = (t_max, t_max, a0);
        if pts.len() >= 3 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            if let Some(c) = linear_lsq(&xs, &ys, &vec![1.0; xs.len()], &[0, 1, 2]) {
                a = c[0].exp();
                t1 = if c[1] < 0.0 { -1.0 / c[1] } else { 10.0 * t_max };
                t2 = if c[2] < 0.0 { 1.0 / (-c[2]).sqrt() } else { 10.0 * t_max };
            }
        }
        vec![t1.min(100.0 * t_max), t2.min(100.0 * t_max), a.max(1e-6), b]
    }
}

/// Single exponential `A·e^{−t/T₁} + B`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExpDecayModel;

impl FitModel for ExpDecayModel {
    fn name(&self) -> String {
        "t1: A*exp(-t/T1) + B".into()
    }
    fn param_names(&self) -> Vec<String> {
        ["a", "t1", "b"].map(String::from).to_vec()
    }
    fn transforms(&self) -> Vec<Transform> {
        vec![Transform::Log, Transform::Log, Transform::Identity]
    }
    fn predict(&self, p: &[f64], t: f64) -> f64 {
        p[0] * (-t / p[1]).exp() + p[2]
    }
    fn gradient(&self, p: &[f64], t: f64) -> Option<Vec<f64>> {
        let e = (-t / p[1]).exp();
        Some(vec![e, p[0] * e * t / (p[1] * p[1]), 1.0])
    }
    fn initial_guess(&self, data: &FitData) -> Vec<f64> {
        let y0 = data.y.first().copied().unwrap_or(1.0);
        let y_min = data.y.iter().cloned().fold(f64::MAX, f64::min);
        let t_max = data.x.iter().cloned().fold(0.0, f64::max).max(1e-12);
        let b = if y_min < 0.3 * y0 { 0.9 * y_min } else { 0.0 };
        let pts: Vec<(f64, f64)> =
            data.x.iter().zip(&data.y).filter(|(_, &y)| y - b > 1e-9).map(|(&t, &y)| (t, (y - b).ln())).collect();
        if pts.len() >= 2 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            if let Some(c) = linear_lsq(&xs, &ys, &vec![1.0; xs.len()], &[0, 1]) {
                if c[1] < 0.0 {
                    return vec![c[0].exp(), -1.0 / c[1], b];
                }
            }
        }
        vec![(y0 - b).max(1e-6), t_max, b]
    }
}

/// Range of the fitted spectral exponent; keeping α away from zero stops the
/// power-law term from turning into a second white level.
pub const FLUX_ALPHA_RANGE: (f64, f64) = (0.25, 3.0);

/// Aliased 1/f plus white flux-noise spectrum,
/// `S*/f^α + S*/(2f_n − f)^α + S_white`, fitted to the logarithm of the data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPsdModel {
    /// Nyquist frequency (Hz).
    pub f_n: f64,
}

impl FluxPsdModel {
    pub fn spectrum(&self, p: &[f64], f: f64) -> f64 {
        let g = 2.0 * self.f_n - f;
        p[0] * (f.powf(-p[1]) + g.powf(-p[1])) + p[2]
    }
}

impl FitModel for FluxPsdModel {
    fn name(&self) -> String {
        "flux_psd: ln(S*/f^alpha + S*/(2 f_n - f)^alpha + S_white)".into()
    }
    fn param_names(&self) -> Vec<String> {
        ["s_star", "alpha", "s_white"].map(String::from).to_vec()
    }
    fn transforms(&self) -> Vec<Transform> {
        vec![Transform::Log, Transform::Bounded(FLUX_ALPHA_RANGE.0, FLUX_ALPHA_RANGE.1), Transform::Log]
    }
    fn predict(&self, p: &[f64], f: f64) -> f64 {
        self.spectrum(p, f).ln()
    }
    fn gradient(&self, p: &[f64], f: f64) -> Option<Vec<f64>> {
        let g = 2.0 * self.f_n - f;
        let (a, b) = (f.powf(-p[1]), g.powf(-p[1]));
        let s = self.spectrum(p, f);
        Some(vec![(a + b) / s, -p[0] * (a * f.ln() + b * g.ln()) / s, 1.0 / s])
    }
    fn initial_guess(&self, data: &FitData) -> Vec<f64> {
        // data.y holds ln S
        let n = data.len();
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| data.x[a].total_cmp(&data.x[b]));
        let hi: Vec<f64> = idx[n - (n / 4).max(1)..].iter().map(|&i| data.y[i].exp()).collect();
        let s_white = hi.iter().sum::<f64>() / hi.len() as f64 * 0.8;
        let lo: Vec<usize> = idx[..(n / 3).max(2)].to_vec();
        let pts: Vec<(f64, f64)> = lo
            .iter()
            .filter(|&&i| data.y[i].exp() > 1.5 * s_white)
            .map(|&i| (data.x[i].ln(), (data.y[i].exp() - s_white).ln()))
            .collect();
        if pts.len() >= 2 {
            let (xs, ys): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            if let Some(c) = linear_lsq(&xs, &ys, &vec![1.0; xs.len()], &[0, 1]) {
                return vec![c[0].exp(), (-c[1]).clamp(0.5, 2.0), s_white.max(1e-30)];
            }
        }
        // no visible low-frequency excess
        vec![1e-3 * s_white.max(1e-30), 1.0, s_white.max(1e-30)]
    }
}

/// `y = Σ_k c_k x^{p_k}` (no offset unless a zero power is listed).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeriesModel {
    pub powers: Vec<i32>,
    pub names: Vec<String>,
}

impl PowerSeriesModel {
    pub fn new(powers: &[i32], names: &[&str]) -> Self {
        Self { powers: powers.to_vec(), names: names.iter().map(|s| s.to_string()).collect() }
    }
}

impl FitModel for PowerSeriesModel {
    fn name(&self) -> String {
        let terms: Vec<String> = self.powers.iter().zip(&self.names).map(|(p, n)| format!("{n}*x^{p}")).collect();
        format!("power_series: {}", terms.join(" + "))
    }
    fn param_names(&self) -> Vec<String> {
        self.names.clone()
    }
    fn predict(&self, c: &[f64], x: f64) -> f64 {
        self.powers.iter().zip(c).map(|(&p, &ck)| ck * x.powi(p)).sum()
    }
    fn gradient(&self, _c: &[f64], x: f64) -> Option<Vec<f64>> {
        Some(self.powers.iter().map(|&p| x.powi(p)).collect())
    }
    fn initial_guess(&self, data: &FitData) -> Vec<f64> {
        linear_lsq(&data.x, &data.y, &weights(data), &self.powers).unwrap_or_else(|| vec![0.0; self.powers.len()])
    }
}
