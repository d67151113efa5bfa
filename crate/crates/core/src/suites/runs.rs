use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{has_errors, CustomProtocol, ExperimentConfig};
use super::{Experiment, Outputs};
use crate::error::{Error, Result};
use crate::fitting::{
    error_budget, fit_flux_noise_psd, fit_gate_error_vs_duration, fit_idle_model, fit_t1,
    fit_telegraph_model, fit_visibility, flux_to_phase_strength, residuals_csv, ExpDecayModel, FitData, FitReport,
    GateFamily, IdleErrorModel, PhaseRelation, PowerSeriesModel, Terms, VisibilityModel,
};
use crate::noise_gen::{NoiseSpec, TelegraphNoise};
use crate::noise_models::{phi2_one_over_f, rb_error_from_variance, zz_error_per_gate, Filter};
use crate::protocols::{
    fit_decay, fit_zz_quadratic, fmt_f64, geometric_lengths, m_max_for_error, rb_echo, rb_ramsey, run_idle_scan,
    run_rb_reference, run_ramsey, run_rto, run_simultaneous_rb, run_spin_echo, run_t1, subtract_t1, CurveKind,
    DecayCurve, MGrid, OffsetMode, ProtocolConfig, RtoConfig,
};
use crate::qubit_sim::{Composite, GateEvent, Spam};

/// Trial-count multiplier: 1 at desk scale, 10 with `--paper-scale`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Scale {
    pub factor: usize,
}

impl Scale {
    pub const DESK: Scale = Scale { factor: 1 };
    pub const PAPER: Scale = Scale { factor: 10 };

    pub fn of(paper_scale: bool) -> Self {
        if paper_scale {
            Self::PAPER
        } else {
            Self::DESK
        }
    }

    pub fn n(&self, desk: usize) -> usize {
        desk * self.factor
    }
}

/// Relaxation time of the reference qubit (s).
pub const T1_REFERENCE: f64 = 26.7e-6;

/// Idle durations of the telegraph scans (ns).
pub const TELEGRAPH_TAUS_NS: [f64; 14] =
    [10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 80.0, 100.0, 125.0, 150.0, 200.0, 250.0, 350.0, 450.0];

/// Idle-error scans are sized so the longest sequence accumulates about this much error.
pub const TELEGRAPH_TARGET: f64 = 0.5;

/// Lengths are capped here; the shortest idles then reach less than the target.
pub const M_CAP: usize = 400;

/// ZZ coupling of the simultaneous-RB study (rad/s).
pub const ZZ_OMEGA: f64 = 2.0 * PI * 0.4e6;

/// Coefficient of `(Ω_ZZ t/2π)²` measured on the device, with its uncertainty.
pub const ZZ_MEASURED_COEFFICIENT: (f64, f64) = (1.86, 0.1);

/// One operating point of the multi-frequency scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OperatingPoint {
    pub f10_ghz: f64,
    /// Flux sensitivity (GHz/Φ₀).
    pub dfdphi_ghz: f64,
    pub t1: f64,
    pub t_phi1: Option<f64>,
    pub t_sw: f64,
    pub delta_f10: f64,
}

/// White + telegraph fits across the qubit spectrum.
pub const OPERATING_POINTS: [OperatingPoint; 4] = [
    OperatingPoint { f10_ghz: 5.1, dfdphi_ghz: 3.39, t1: 30.6e-6, t_phi1: Some(20.6e-6), t_sw: 182e-6, delta_f10: 184e3 },
    OperatingPoint { f10_ghz: 4.9, dfdphi_ghz: 4.81, t1: 26.7e-6, t_phi1: None, t_sw: 84e-9, delta_f10: 479e3 },
    OperatingPoint { f10_ghz: 4.5, dfdphi_ghz: 6.95, t1: 31.3e-6, t_phi1: Some(12.4e-6), t_sw: 98e-9, delta_f10: 484e3 },
    OperatingPoint { f10_ghz: 4.0, dfdphi_ghz: 9.23, t1: 36.2e-6, t_phi1: Some(15.5e-6), t_sw: 263e-9, delta_f10: 469e3 },
];

/// 1/f flux-noise amplitude at 1 Hz, (µΦ₀)², and the low cutoff (Hz) used for its idle-error lines.
pub const FLUX_S_STAR: f64 = 2.4;
pub const FLUX_F_C: f64 = 1.0 / 600.0;

/// Telegraph fits of other devices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviceRow {
    pub label: &'static str,
    pub f10_ghz: f64,
    pub dfdphi_ghz: f64,
    pub t1: f64,
    pub t_sw: f64,
    pub delta_f10: f64,
}

pub const DEVICES: [DeviceRow; 4] = [
    DeviceRow { label: "a", f10_ghz: 4.9, dfdphi_ghz: 4.81, t1: 26.7e-6, t_sw: 84e-9, delta_f10: 479e3 },
    DeviceRow { label: "b", f10_ghz: 4.8, dfdphi_ghz: 5.36, t1: 15.7e-6, t_sw: 183e-9, delta_f10: 274e3 },
    DeviceRow { label: "c", f10_ghz: 5.5, dfdphi_ghz: 3.96, t1: 22.2e-6, t_sw: 201e-9, delta_f10: 199e3 },
    DeviceRow { label: "d", f10_ghz: 4.9, dfdphi_ghz: 6.62, t1: 15.7e-6, t_sw: 32e-9, delta_f10: 528e3 },
];

/// Gate-error coefficients vs duration: linear (1e-6/ns) and quadratic (1e-6/ns²).
pub const GATE_TABLE: [(GateFamily, f64, Option<f64>); 4] = [
    (GateFamily::I, 17.0, Some(0.22)),
    (GateFamily::XX, 20.0, None),
    (GateFamily::Z, 24.0, Some(0.18)),
    (GateFamily::YX, 22.0, None),
];

/// Gate durations of the gate-implementation study (ns).
pub const GATE_DURATIONS_NS: [f64; 12] = [20.0, 40.0, 60.0, 80.0, 100.0, 120.0, 140.0, 160.0, 180.0, 200.0, 220.0, 240.0];

pub(crate) fn default_noise(experiment: Experiment) -> NoiseSpec {
    let telegraph = Some(TelegraphNoise { t_sw: 84e-9, delta_f10: 479e3, up_down_ratio: 1.0 });
    match experiment {
        Experiment::Fig1Comparison => NoiseSpec { t1: Some(T1_REFERENCE), t_phi1: Some(15.1e-6), telegraph, ..Default::default() },
        _ => NoiseSpec { t1: Some(T1_REFERENCE), telegraph, ..Default::default() },
    }
}

/// Longest Ramsey-filtered idle a fixed suite uses, for the 1/f validity check.
pub(crate) fn ramsey_tau_max(experiment: Experiment) -> Option<f64> {
    match experiment {
        Experiment::Fig1Comparison => Some(FIG1_RAMSEY_MAX),
        Experiment::Fig2Telegraph => Some(TELEGRAPH_TAUS_NS[TELEGRAPH_TAUS_NS.len() - 1] * 1e-9),
        _ => None,
    }
}

/// Independent seed for a named part of a suite.
pub fn sub_seed(seed: u64, label: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().expect("8 bytes"))
}

fn ns(v: &[f64]) -> Vec<f64> {
    v.iter().map(|t| t * 1e-9).collect()
}

/// Idle-scan settings whose longest sequence per τ accumulates about
/// `target` expected error (five geometric lengths, capped at [`M_CAP`]).
pub fn idle_scan_plan(
    noise: NoiseSpec,
    taus: &[f64],
    filter: Filter,
    n_sequences: usize,
    target: f64,
    seed: u64,
) -> Result<ProtocolConfig> {
    let p = noise.model_params();
    let lengths = taus
        .iter()
        .map(|&t| Ok(geometric_lengths(m_max_for_error(rb_error_from_variance(&p, t, filter)?, target, 4, M_CAP), 5)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProtocolConfig {
        m_grid: MGrid::PerTau { lengths },
        n_sequences,
        tau_values: taus.to_vec(),
        noise,
        seed,
        ..Default::default()
    })
}

/// A fitted parameter next to the value that was injected.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamCheck {
    pub name: String,
    pub truth: f64,
    pub fitted: f64,
    pub error: f64,
}

impl ParamCheck {
    pub fn rel_dev(&self) -> f64 {
        ((self.fitted - self.truth) / self.truth).abs()
    }
}

/// Simulate-then-fit result for one fixture row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowRoundTrip {
    pub label: String,
    pub params: Vec<ParamCheck>,
    /// Same data fitted with the small-angle relation, when that differs from `params`.
    pub small_angle: Vec<ParamCheck>,
    pub note: Option<String>,
}

impl RowRoundTrip {
    /// Every parameter within `tol` relative deviation (NaN fails).
    pub fn within(&self, tol: f64) -> bool {
        self.params.iter().all(|p| p.rel_dev() <= tol)
    }

    pub fn worst(&self) -> f64 {
        self.params.iter().map(|p| if p.rel_dev().is_nan() { f64::INFINITY } else { p.rel_dev() }).fold(0.0, f64::max)
    }
}

pub fn rows_csv(rows: &[RowRoundTrip]) -> String {
    let mut s = String::from("row,relation,parameter,truth,fitted,fit_error,relative_deviation\n");
    for r in rows {
        let primary = if r.small_angle.is_empty() { "small_angle" } else { "twirled" };
        let sets = [(primary, &r.params), ("small_angle", &r.small_angle)];
        for (relation, p) in sets.iter().flat_map(|(rel, ps)| ps.iter().map(move |p| (*rel, p))) {
            let _ = writeln!(
                s,
                "{},{relation},{},{},{},{},{}",
                r.label,
                p.name,
                fmt_f64(p.truth),
                fmt_f64(p.fitted),
                fmt_f64(p.error),
                fmt_f64(p.rel_dev())
            );
        }
    }
    s
}

/// Files and a human-readable summary of one suite run.
#[derive(Debug, Clone, PartialEq)]
pub struct SuiteRun {
    pub outputs: Outputs,
    pub summary: String,
}

/// Validates `config` and runs its suite.
pub fn run(config: &ExperimentConfig) -> Result<SuiteRun> {
    let d = config.diagnostics();
    if has_errors(&d) {
        return Err(Error::Config(d.iter().map(|x| x.to_string()).collect()));
    }
    for w in &d {
        log::warn!("{w}");
    }
    let scale = Scale::of(config.paper_scale);
    let seed = config.seed;
    let mut out = Outputs::default();
    let summary = match config.experiment {
        Experiment::Fig1Comparison => fig1_comparison(config.effective_noise().expect("noise"), scale, seed, &mut out)?,
        Experiment::Fig2Telegraph => fig2_telegraph(config.effective_noise().expect("noise"), scale, seed, &mut out)?,
        Experiment::Fig3Zz => fig3_zz(scale, seed, &mut out)?.1,
        Experiment::Fig4Gates => summarize(&fig4_gates(scale, seed, &mut out)?),
        Experiment::AppFSpectrum => summarize(&app_f_spectrum(scale, seed, &mut out)?),
        Experiment::AppDRto => app_d_rto(config.rto.clone(), seed, &mut out)?,
        Experiment::AppHDevices => summarize(&app_h_devices(scale, seed, &mut out)?),
        Experiment::Custom => custom(config, &mut out)?,
    };
    Ok(SuiteRun { outputs: out, summary })
}

fn summarize(rows: &[RowRoundTrip]) -> String {
    let mut s = String::new();
    for r in rows {
        let _ = write!(s, "{}:", r.label);
        for p in &r.params {
            let ratio = p.fitted / p.truth;
            if (0.1..10.0).contains(&ratio) {
                let _ = write!(s, " {} {:.4e} (injected {:.4e}, {:+.1}%)", p.name, p.fitted, p.truth, 100.0 * (ratio - 1.0));
            } else {
                let _ = write!(s, " {} {:.4e} (injected {:.4e}, ratio {ratio:.2e})", p.name, p.fitted, p.truth);
            }
        }
        if let Some(n) = &r.note {
            let _ = write!(s, " [{n}]");
        }
        s.push('\n');
    }
    s
}

fn report_text(title: &str, report: &FitReport, extra: &[(String, f64)]) -> String {
    let mut s = format!("# {title}\n{}", report.to_text());
    for (k, v) in extra {
        let _ = writeln!(s, "{k} = {}", fmt_f64(*v));
    }
    s
}

// ---------- fig1_comparison ----------

const FIG1_RAMSEY_MAX: f64 = 5.0e-6;
const FIG1_ECHO_MAX: f64 = 12.0e-6;
const FIG1_SPAM: Spam = Spam { a: 0.88, b: 0.015 };
const FIG1_RB_TAUS_NS: [f64; 8] = [10.0, 20.0, 40.0, 80.0, 150.0, 300.0, 500.0, 1000.0];

fn linspace(hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| hi * i as f64 / (n - 1) as f64).collect()
}

/// Ramsey, spin echo and T₁ against RB Ramsey and RB echo on the same noise;
/// the RB idle errors are also shown as an equivalent Ramsey visibility.
fn fig1_comparison(noise: NoiseSpec, scale: Scale, seed: u64, out: &mut Outputs) -> Result<String> {
    let mut summary = String::new();
    let coherence = |taus: Vec<f64>, label: &str| ProtocolConfig {
        n_sequences: scale.n(2000),
        tau_values: taus,
        noise,
        spam: Some(FIG1_SPAM),
        seed: sub_seed(seed, label),
        ..Default::default()
    };
    let ramsey = run_ramsey(&coherence(linspace(FIG1_RAMSEY_MAX, 26), "ramsey"))?;
    let echo = run_spin_echo(&coherence(linspace(FIG1_ECHO_MAX, 25), "spin_echo"))?;
    let mut fits = Vec::new();
    for (name, curve) in [("ramsey", &ramsey), ("spin_echo", &echo)] {
        out.add(format!("{name}.csv"), curve.to_csv());
        let data = curve.to_fit_data()?;
        let r = fit_visibility(&data)?;
        let t_phi2 = r.value("t_phi2");
        // a Gaussian time far beyond the record means the decay has no Gaussian part
        let t_phi2 = if t_phi2 < 1e3 * FIG1_ECHO_MAX { format!("{t_phi2:.3e} s") } else { "unresolved (no Gaussian decay)".into() };
        let _ = writeln!(summary, "{name}: T_phi1 = {:.3e} s, T_phi2 = {t_phi2}", r.value("t_phi1"));
        out.add(format!("{name}_fit.txt"), report_text(name, &r, &[]));
        out.add(format!("{name}_plot.csv"), residuals_csv(&VisibilityModel, &r, &data));
        fits.push(r);
    }
    let t1_cfg = ProtocolConfig {
        n_sequences: scale.n(200),
        shots: Some(100),
        ..coherence(linspace(100e-6, 26), "t1")
    };
    if t1_cfg.noise.t1.is_some() {
        let t1 = run_t1(&t1_cfg)?;
        out.add("t1.csv", t1.to_csv());
        let data = t1.to_fit_data()?;
        let r = fit_t1(&data)?;
        let _ = writeln!(summary, "t1: T1 = {:.3e} s", r.value("t1"));
        out.add("t1_fit.txt", report_text("t1", &r, &[]));
        out.add("t1_plot.csv", residuals_csv(&ExpDecayModel, &r, &data));
    }
    let taus = ns(&FIG1_RB_TAUS_NS);
    let (a, b) = (fits[0].value("a"), fits[0].value("b"));
    for (name, filter) in [("rb_ramsey", Filter::Ramsey), ("rb_echo", Filter::Echo)] {
        let cfg = idle_scan_plan(noise, &taus, filter, scale.n(3000), TELEGRAPH_TARGET, sub_seed(seed, name))?;
        let scan = if filter == Filter::Ramsey { rb_ramsey(&cfg)? } else { rb_echo(&cfg)? };
        out.add(format!("{name}.csv"), scan.curve.to_csv());
        // Equivalent visibility A·exp(−⟨φ²⟩/2)·exp(−τ/2T₁) + B with ⟨φ²⟩ = 6(r − τ/3T₁).
        let mut v = Vec::new();
        let mut e = Vec::new();
        for p in &scan.points {
            let (phase, decay) = match noise.t1 {
                Some(t1) => (subtract_t1(p.r, p.tau, t1)?, (-p.tau / (2.0 * t1)).exp()),
                None => (p.r, 1.0),
            };
            let core = (-3.0 * phase).exp() * decay;
            v.push(a * core + b);
            e.push(a.abs() * 3.0 * core * p.r_err);
        }
        let vis = DecayCurve::new(taus.clone(), v, e, scan.curve.n_trials, CurveKind::Visibility)?;
        out.add(format!("{name}_visibility.csv"), vis.to_csv());
        let _ = writeln!(summary, "{name}: r(τ = {:.0} ns) = {:.4e}", taus[3] * 1e9, scan.curve.y[3]);
    }
    Ok(summary)
}

// ---------- fig2_telegraph ----------

fn fig2_telegraph(noise: NoiseSpec, scale: Scale, seed: u64, out: &mut Outputs) -> Result<String> {
    let t1 = noise.t1.ok_or_else(|| Error::Config(vec!["noise.t1 is required by fig2_telegraph".into()]))?;
    let taus = ns(&TELEGRAPH_TAUS_NS);
    let cfg = idle_scan_plan(noise, &taus, Filter::Ramsey, scale.n(3000), TELEGRAPH_TARGET, sub_seed(seed, "fig2"))?;
    let scan = rb_ramsey(&cfg)?;
    out.add("rb_ramsey.csv", scan.curve.to_csv());
    let data = scan.curve.to_fit_data()?;
    let fit = fit_telegraph_model(&data, t1)?;
    let model = IdleErrorModel::new(Terms::TELEGRAPH, Some(t1), Filter::Ramsey);
    out.add("rb_ramsey_plot.csv", residuals_csv(&model, &fit.report, &data));
    let mut extra = vec![("t1_fixed".to_string(), t1)];
    if let Some(t) = noise.telegraph {
        extra.push(("t_sw_injected".into(), t.t_sw));
        extra.push(("delta_f10_injected".into(), t.delta_f10));
    }
    out.add("telegraph_fit.txt", report_text("T1 + telegraph idle error", &fit.report, &extra));
    let mut s = String::from("tau_s,model,short_time,long_time\n");
    for i in 1..=100 {
        let t = 5e-9 * i as f64;
        let m = crate::fitting::FitModel::predict(&model, &fit.report.params, t);
        let _ = writeln!(s, "{},{},{},{}", fmt_f64(t), fmt_f64(m), fmt_f64(fit.asymptotes.short_time(t)), fmt_f64(fit.asymptotes.long_time(t)));
    }
    out.add("asymptotes.csv", s);
    let params = crate::noise_models::NoiseModelParams::default()
        .with_t1(t1)
        .with_telegraph(fit.report.value("t_sw"), fit.report.value("delta_f10"));
    out.add("error_budget.csv", error_budget(&params, 40e-9)?.to_csv());
    let (ts, ts_e) = fit.t_sw();
    let (df, df_e) = fit.delta_f10();
    Ok(format!("fig2_telegraph: T_sw = {:.1} ± {:.1} ns, Δf10 = {:.1} ± {:.1} kHz\n", ts * 1e9, ts_e * 1e9, df * 1e-3, df_e * 1e-3))
}

// ---------- fig3_zz ----------

/// Gate durations of the ZZ study (s).
pub fn zz_gate_times() -> Vec<f64> {
    (0..10).map(|i| (20.0 + i as f64 * 230.0 / 9.0) * 1e-9).collect()
}

/// Simultaneous-RB settings for `t_gates`: pure ZZ, `A` fitted.
pub fn zz_plan(t_gates: &[f64], omega: f64, n_sequences: usize, seed: u64) -> ProtocolConfig {
    let lengths = t_gates
        .iter()
        .map(|&t| {
            let per_clifford = crate::protocols::PHYSICAL_GATES_PER_CLIFFORD * (PI * PI / 6.0) * (omega * t / (2.0 * PI)).powi(2);
            geometric_lengths(m_max_for_error(per_clifford, 0.3, 4, M_CAP), 5)
        })
        .collect();
    ProtocolConfig {
        m_grid: MGrid::PerTau { lengths },
        n_sequences,
        tau_values: t_gates.to_vec(),
        seed,
        offsets: OffsetMode::FreeA,
        ..Default::default()
    }
}

/// Returns the quadratic coefficient fit and the summary text.
pub fn fig3_zz(scale: Scale, seed: u64, out: &mut Outputs) -> Result<(crate::protocols::ZzQuadraticFit, String)> {
    let cfg = zz_plan(&zz_gate_times(), ZZ_OMEGA, scale.n(400), sub_seed(seed, "fig3"));
    let sim = run_simultaneous_rb(&cfg, ZZ_OMEGA)?;
    out.add("zz_excess.csv", sim.excess.to_csv());
    let fit = fit_zz_quadratic(&sim.excess, ZZ_OMEGA)?;
    let theory = PI * PI / 6.0;
    let x: Vec<f64> = sim.excess.x.iter().map(|t| ZZ_OMEGA * t / (2.0 * PI)).collect();
    let data = FitData::new(x, sim.excess.y.clone(), Some(sim.excess.yerr.clone()))?;
    out.add("zz_plot.csv", residuals_csv(&PowerSeriesModel::new(&[2], &["c"]), &fit.report, &data));
    let mut s = String::from("t_gate_s,excess,excess_err,formula\n");
    for (i, t) in sim.excess.x.iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{}", fmt_f64(*t), fmt_f64(sim.excess.y[i]), fmt_f64(sim.excess.yerr[i]), fmt_f64(zz_error_per_gate(ZZ_OMEGA, *t)?));
    }
    out.add("zz_formula.csv", s);
    let extra = vec![
        ("omega_zz_rad_per_s".to_string(), ZZ_OMEGA),
        ("random_phase_coefficient".into(), theory),
        ("deviation_in_fit_errors".into(), (fit.coefficient - theory) / fit.coefficient_err),
        ("device_coefficient".into(), ZZ_MEASURED_COEFFICIENT.0),
        ("device_coefficient_err".into(), ZZ_MEASURED_COEFFICIENT.1),
    ];
    out.add("zz_fit.txt", report_text("excess error per gate = c·(Ω_ZZ t_gate/2π)²", &fit.report, &extra));
    let summary = format!(
        "fig3_zz: c = {:.3} ± {:.3} (π²/6 = {theory:.3}, device {:.2} ± {:.2})\n",
        fit.coefficient, fit.coefficient_err, ZZ_MEASURED_COEFFICIENT.0, ZZ_MEASURED_COEFFICIENT.1
    );
    Ok((fit, summary))
}

// ---------- fig4_gates ----------

/// Noise that reproduces a gate-table row: T₁ fixed, white dephasing for the
/// rest of the linear term, quasi-static dephasing for the quadratic one.
pub fn gate_row_noise(linear_per_ns: f64, quadratic_per_ns2: Option<f64>) -> Result<NoiseSpec> {
    let white_rate = linear_per_ns * 1e9 - 1.0 / (3.0 * T1_REFERENCE);
    if white_rate <= 0.0 {
        return Err(Error::domain("linear term below the relaxation share"));
    }
    Ok(NoiseSpec {
        t1: Some(T1_REFERENCE),
        t_phi1: Some(1.0 / (3.0 * white_rate)),
        // r = τ²/(3T_φ2²)
        t_phi2: quadratic_per_ns2.map(|q| 1.0 / (3.0 * q * 1e18).sqrt()),
        ..Default::default()
    })
}

pub fn gate_event(family: GateFamily, duration: f64) -> GateEvent {
    match family {
        GateFamily::I => GateEvent::Idle { duration },
        GateFamily::XX => GateEvent::Composite { composite: Composite::Xx, duration },
        GateFamily::Z => GateEvent::ZDetune { duration, angle: PI },
        GateFamily::YX => GateEvent::Composite { composite: Composite::Yx, duration },
    }
}

/// Sequence-error target of the gate scans; kept small because quasi-static
/// noise turns the decay into a mixture of exponentials.
pub const GATE_TARGET: f64 = 0.1;

pub fn fig4_gates(scale: Scale, seed: u64, out: &mut Outputs) -> Result<Vec<RowRoundTrip>> {
    let durations = ns(&GATE_DURATIONS_NS);
    let mut rows = Vec::new();
    let mut reports = String::new();
    for (family, lin, quad) in GATE_TABLE {
        let label = family.label();
        let noise = gate_row_noise(lin * 1e-6, quad.map(|q| q * 1e-6))?;
        let cfg = idle_scan_plan(noise, &durations, Filter::Ramsey, scale.n(3000), GATE_TARGET, sub_seed(seed, label))?;
        let scan = run_idle_scan(&cfg, |d| gate_event(family, d))?;
        out.add(format!("gate_{label}.csv"), scan.curve.to_csv());
        let c = &scan.curve;
        let data = FitData::new(c.x.iter().map(|t| t * 1e9).collect(), c.y.clone(), c.to_fit_data()?.sigma)?;
        let fit = fit_gate_error_vs_duration(family, &data)?;
        let _ = write!(reports, "{}", report_text(&format!("gate {label}, error vs duration (ns)"), &fit.report, &[]));
        let (l, le) = fit.linear();
        let mut params = vec![ParamCheck { name: "linear".into(), truth: lin * 1e-6, fitted: l, error: le }];
        if let (Some(q), Some((fq, fqe))) = (quad, fit.quadratic()) {
            params.push(ParamCheck { name: "quadratic".into(), truth: q * 1e-6, fitted: fq, error: fqe });
        }
        rows.push(RowRoundTrip { label: label.into(), params, small_angle: Vec::new(), note: None });
        if family == GateFamily::I {
            out.add("error_budget.csv", error_budget(&noise.model_params(), 40e-9)?.to_csv());
        }
    }
    out.add("gates_fit.txt", reports);
    out.add("gates_table.csv", rows_csv(&rows));
    Ok(rows)
}

// ---------- telegraph fixture rows ----------

/// Simulates RB Ramsey for one fixture row and fits it with both phase
/// relations; the twirled fit is the round-trip result.
fn telegraph_row(
    label: &str,
    noise: NoiseSpec,
    terms: Terms,
    scale: Scale,
    seed: u64,
    out: &mut Outputs,
    reports: &mut String,
) -> Result<RowRoundTrip> {
    let t1 = noise.t1.expect("fixture rows carry T1");
    let taus = ns(&TELEGRAPH_TAUS_NS);
    let cfg = idle_scan_plan(noise, &taus, Filter::Ramsey, scale.n(3000), TELEGRAPH_TARGET, sub_seed(seed, label))?;
    let scan = rb_ramsey(&cfg)?;
    out.add(format!("rb_ramsey_{label}.csv"), scan.curve.to_csv());
    let mut truth = Vec::new();
    if terms.white {
        truth.push(("t_phi1", noise.t_phi1.unwrap_or(f64::INFINITY)));
    }
    let tel = noise.telegraph.expect("fixture rows carry telegraph noise");
    truth.push(("t_sw", tel.t_sw));
    truth.push(("delta_f10", tel.delta_f10));
    let data = scan.curve.to_fit_data()?;
    let mut sets = Vec::new();
    let mut note = None;
    for relation in [PhaseRelation::Twirled, PhaseRelation::SmallAngle] {
        let model = IdleErrorModel::new(terms, Some(t1), Filter::Ramsey).with_relation(relation);
        let tag = match relation {
            PhaseRelation::Twirled => "twirled",
            PhaseRelation::SmallAngle => "small_angle",
        };
        let checks = match fit_idle_model(&model, &data) {
            Ok(fit) => {
                if relation == PhaseRelation::Twirled {
                    out.add(format!("rb_ramsey_{label}_plot.csv"), residuals_csv(&model, &fit.report, &data));
                }
                let mut extra = vec![("t1_fixed".to_string(), t1)];
                if let Some(t) = fit.correlated_equivalent_t_phi2 {
                    extra.push(("correlated_equivalent_t_phi2".into(), t));
                    if relation == PhaseRelation::Twirled {
                        note = Some(format!("switching time beyond the idle range; correlated equivalent T_phi2 = {t:.3e} s"));
                    }
                }
                if !fit.identifiable {
                    log::warn!("{label} ({tag}): fit covariance is ill-conditioned");
                }
                let _ = write!(reports, "{}", report_text(&format!("{label} ({tag})"), &fit.report, &extra));
                truth
                    .iter()
                    .map(|&(n, t)| ParamCheck { name: n.into(), truth: t, fitted: fit.report.value(n), error: fit.report.error(n) })
                    .collect()
            }
            Err(Error::Fit(msg)) => {
                let _ = writeln!(reports, "# {label} ({tag})\nfit failed: {msg}");
                if relation == PhaseRelation::Twirled {
                    note = Some(format!("fit failed: {msg}"));
                }
                truth
                    .iter()
                    .map(|&(n, t)| ParamCheck { name: n.into(), truth: t, fitted: f64::NAN, error: f64::NAN })
                    .collect()
            }
            Err(e) => return Err(e),
        };
        sets.push(checks);
    }
    let small_angle = sets.pop().expect("two fits");
    let params = sets.pop().expect("two fits");
    Ok(RowRoundTrip { label: label.into(), params, small_angle, note })
}

pub fn app_f_spectrum(scale: Scale, seed: u64, out: &mut Outputs) -> Result<Vec<RowRoundTrip>> {
    let mut rows = Vec::new();
    let mut reports = String::new();
    for op in OPERATING_POINTS {
        let noise = NoiseSpec {
            t1: Some(op.t1),
            t_phi1: op.t_phi1,
            telegraph: Some(TelegraphNoise { t_sw: op.t_sw, delta_f10: op.delta_f10, up_down_ratio: 1.0 }),
            ..Default::default()
        };
        let terms = if op.t_phi1.is_some() { Terms::WHITE_TELEGRAPH } else { Terms::TELEGRAPH };
        let label = format!("{:.1}GHz", op.f10_ghz);
        let row = telegraph_row(&label, noise, terms, scale, seed, out, &mut reports)?;
        rows.push(row);
    }
    out.add("appF_fits.txt", reports);
    out.add("appF_fits.csv", rows_csv(&rows));
    // Idle error expected from the measured 1/f flux noise at each operating point.
    let mut s = String::from("tau_s");
    for op in OPERATING_POINTS {
        let _ = write!(s, ",r_1f_{:.1}GHz", op.f10_ghz);
    }
    s.push('\n');
    for t in ns(&TELEGRAPH_TAUS_NS) {
        s.push_str(&fmt_f64(t));
        for op in OPERATING_POINTS {
            let strength = flux_to_phase_strength(FLUX_S_STAR, op.dfdphi_ghz * 1e9);
            let _ = write!(s, ",{}", fmt_f64(phi2_one_over_f(t, strength, FLUX_F_C, Filter::Ramsey)? / 6.0));
        }
        s.push('\n');
    }
    out.add("one_over_f_lines.csv", s);
    Ok(rows)
}

pub fn app_h_devices(scale: Scale, seed: u64, out: &mut Outputs) -> Result<Vec<RowRoundTrip>> {
    let mut rows = Vec::new();
    let mut reports = String::new();
    for d in DEVICES {
        let noise = NoiseSpec {
            t1: Some(d.t1),
            telegraph: Some(TelegraphNoise { t_sw: d.t_sw, delta_f10: d.delta_f10, up_down_ratio: 1.0 }),
            ..Default::default()
        };
        let row = telegraph_row(&format!("device_{}", d.label), noise, Terms::TELEGRAPH, scale, seed, out, &mut reports)?;
        rows.push(row);
    }
    out.add("appH_fits.txt", reports);
    out.add("appH_fits.csv", rows_csv(&rows));
    Ok(rows)
}

// ---------- appD_rto ----------

fn app_d_rto(rto: Option<RtoConfig>, seed: u64, out: &mut Outputs) -> Result<String> {
    let cfg = RtoConfig { seed: sub_seed(seed, "rto"), ..rto.unwrap_or_default() };
    let psd = run_rto(&cfg)?;
    out.add("rto_psd.csv", psd.to_csv());
    let fit = fit_flux_noise_psd(&psd.freqs, &psd.values, psd.f_n)?;
    let mut s = String::from("f_hz,psd,model,one_over_f\n");
    for (f, v) in psd.freqs.iter().zip(&psd.values) {
        let _ = writeln!(s, "{},{},{},{}", fmt_f64(*f), fmt_f64(*v), fmt_f64(fit.spectrum(*f)), fmt_f64(fit.one_over_f_line(*f)));
    }
    out.add("rto_plot.csv", s);
    let extra = vec![
        ("s_star_injected".to_string(), cfg.s_star),
        ("alpha_injected".into(), cfg.alpha),
        ("s_white_injected".into(), cfg.s_white),
        ("phase_noise_s_1f".into(), flux_to_phase_strength(fit.report.value("s_star"), cfg.dfdphi)),
    ];
    out.add("rto_fit.txt", report_text("aliased 1/f + white flux noise", &fit.report, &extra));
    Ok(format!(
        "appD_rto: S* = {:.3} ± {:.3}, alpha = {:.3} ± {:.3}, S_white = {:.3} ± {:.3}\n",
        fit.report.value("s_star"),
        fit.report.error("s_star"),
        fit.report.value("alpha"),
        fit.report.error("alpha"),
        fit.report.value("s_white"),
        fit.report.error("s_white")
    ))
}

// ---------- custom ----------

fn custom(config: &ExperimentConfig, out: &mut Outputs) -> Result<String> {
    let settings = config.custom.expect("validated");
    let mut cfg = config.protocol.clone().expect("validated");
    cfg.seed = config.seed;
    if let Some(n) = config.noise {
        cfg.noise = n;
    }
    cfg.n_sequences = Scale::of(config.paper_scale).n(cfg.n_sequences);
    let name = settings.protocol.name();
    let mut summary = String::new();
    let curve = match settings.protocol {
        CustomProtocol::Reference => {
            let c = run_rb_reference(&cfg)?;
            let f = fit_decay(&c)?;
            if let Some(r) = &f.report {
                out.add(format!("{name}_fit.txt"), report_text(name, r, &[("r".into(), f.r), ("r_err".into(), f.r_err)]));
            }
            let _ = writeln!(summary, "reference: p = {:.6} ± {:.2e}", f.p, f.p_err);
            c
        }
        CustomProtocol::RbRamsey | CustomProtocol::RbEcho => {
            let (scan, filter) = if settings.protocol == CustomProtocol::RbRamsey {
                (rb_ramsey(&cfg)?, Filter::Ramsey)
            } else {
                (rb_echo(&cfg)?, Filter::Echo)
            };
            if let Some(terms) = settings.fit {
                let data = scan.curve.to_fit_data()?;
                let model = IdleErrorModel::new(terms, cfg.noise.t1, filter).with_relation(settings.relation);
                let fit = fit_idle_model(&model, &data)?;
                out.add(format!("{name}_fit.txt"), report_text(&crate::fitting::FitModel::name(&model), &fit.report, &[]));
                out.add(format!("{name}_plot.csv"), residuals_csv(&model, &fit.report, &data));
                let _ = writeln!(summary, "{name}: fit chi2/dof = {:.3}", fit.report.reduced_chi2());
            }
            scan.curve
        }
        CustomProtocol::Ramsey | CustomProtocol::SpinEcho => {
            let c = if settings.protocol == CustomProtocol::Ramsey { run_ramsey(&cfg)? } else { run_spin_echo(&cfg)? };
            if c.len() >= 5 {
                let data = c.to_fit_data()?;
                let r = fit_visibility(&data)?;
                out.add(format!("{name}_fit.txt"), report_text(name, &r, &[]));
                out.add(format!("{name}_plot.csv"), residuals_csv(&VisibilityModel, &r, &data));
            }
            c
        }
        CustomProtocol::T1 => {
            let c = run_t1(&cfg)?;
            if cfg.noise.t1.is_some() && c.len() >= 3 {
                let data = c.to_fit_data()?;
                let r = fit_t1(&data)?;
                out.add(format!("{name}_fit.txt"), report_text(name, &r, &[]));
                out.add(format!("{name}_plot.csv"), residuals_csv(&ExpDecayModel, &r, &data));
            }
            c
        }
        CustomProtocol::Simultaneous => {
            let omega = 2.0 * PI * settings.omega_zz_hz.expect("validated");
            let sim = run_simultaneous_rb(&cfg, omega)?;
            if sim.excess.len() >= 2 && omega != 0.0 {
                let fit = fit_zz_quadratic(&sim.excess, omega)?;
                out.add(format!("{name}_fit.txt"), report_text(name, &fit.report, &[("random_phase_coefficient".into(), PI * PI / 6.0)]));
            }
            sim.excess
        }
    };
    out.add(format!("{name}.csv"), curve.to_csv());
    let _ = writeln!(summary, "{name}: {} points", curve.len());
    Ok(summary)
}
