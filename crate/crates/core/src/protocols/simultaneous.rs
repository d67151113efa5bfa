use rand::Rng;
use serde::Serialize;

use super::config::ProtocolConfig;
use super::curve::{CurveKind, DecayCurve};
use super::engine::{mean_se, par_map, read_out};
use super::rb::{analyze_interleaved_offsets, DecayFit};
use crate::error::{Error, Result};
use crate::fitting::{fit_auto, FitOptions, FitReport, PowerSeriesModel};
use crate::noise_gen::RngStream;
use crate::qubit_sim::{clifford_table, evolve_zz, measure_error_two, TwoQubitState, Unitary2};

const TAG_SIM: u64 = 0x5a5a;

/// Average physical pulse slots per Clifford.
pub const PHYSICAL_GATES_PER_CLIFFORD: f64 = 1.875;

/// Pulse slots of a Clifford string plus its recovery; the identity takes one idle slot.
fn slot_unitaries(seq: &[usize]) -> Vec<Unitary2> {
    let table = clifford_table();
    let recovery = table.inverse(table.product(seq));
    let mut out = Vec::new();
    for &c in seq.iter().chain(std::iter::once(&recovery)) {
        let op = table.get(c);
        if op.decomposition.is_empty() {
            out.push(Unitary2::identity());
        } else {
            out.extend(op.decomposition.iter().map(|g| g.unitary()));
        }
    }
    out
}

/// Mean survival of both qubits after independent RB strings run in lockstep
/// pulse slots of `t_gate`, with ZZ acting for half a slot on either side of
/// each pulse. The qubit that finishes first idles in its ground state.
fn pair_survival(cfg: &ProtocolConfig, m: usize, t_gate: f64, omega_zz: f64, stream: RngStream) -> Result<f64> {
    let table = clifford_table();
    let mut rng = stream.child(1).rng();
    let seq_a: Vec<usize> = (0..m).map(|_| rng.random_range(0..table.len())).collect();
    let seq_b: Vec<usize> = (0..m).map(|_| rng.random_range(0..table.len())).collect();
    let (sa, sb) = (slot_unitaries(&seq_a), slot_unitaries(&seq_b));
    let id = Unitary2::identity();
    let mut state = TwoQubitState::ground();
    for k in 0..sa.len().max(sb.len()) {
        state = evolve_zz(&state, omega_zz, t_gate / 2.0);
        state = state.apply_local(sa.get(k).unwrap_or(&id), sb.get(k).unwrap_or(&id));
        state = evolve_zz(&state, omega_zz, t_gate / 2.0);
    }
    let mut s = 0.0;
    for (q, tag) in [(0, 2), (1, 3)] {
        let p = measure_error_two(&state, q, 0, None);
        s += 1.0 - read_out(p, cfg.spam, cfg.shots, stream.child(tag))?;
    }
    Ok(s / 2.0)
}

fn pair_curve(cfg: &ProtocolConfig, lengths: &[usize], t_gate: f64, omega_zz: f64, point: u64) -> Result<DecayCurve> {
    let base = RngStream::new(cfg.seed, TAG_SIM);
    let mut y = Vec::new();
    let mut yerr = Vec::new();
    for (mi, &m) in lengths.iter().enumerate() {
        let v = par_map(cfg.n_sequences, |s| {
            pair_survival(cfg, m, t_gate, omega_zz, base.descend(&[point, mi as u64, s as u64]))
        })?;
        let (mean, se) = mean_se(&v);
        y.push(mean);
        yerr.push(se);
    }
    DecayCurve::new(lengths.iter().map(|&m| m as f64).collect(), y, yerr, cfg.n_sequences, CurveKind::RbFidelity)
}

/// Isolated (Ω_ZZ = 0) and simultaneous RB at one gate duration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimultaneousPoint {
    pub t_gate: f64,
    pub isolated: DecayFit,
    pub simultaneous: DecayFit,
    /// `(r_sim − r_iso)/1.875`, error per physical gate.
    pub excess: f64,
    pub excess_err: f64,
    #[serde(skip)]
    pub curves: (DecayCurve, DecayCurve),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimultaneousRb {
    pub omega_zz: f64,
    pub points: Vec<SimultaneousPoint>,
    /// Excess error per physical gate vs gate duration (`idle_error` kind).
    pub excess: DecayCurve,
}

/// Simultaneous two-qubit RB with always-on ZZ; `cfg.tau_values` are the gate
/// durations and each gets its own length grid. Only the ZZ coupling acts.
pub fn run_simultaneous_rb(cfg: &ProtocolConfig, omega_zz: f64) -> Result<SimultaneousRb> {
    cfg.validate()?;
    if !omega_zz.is_finite() {
        return Err(Error::domain("omega_zz must be finite"));
    }
    if cfg.tau_values.is_empty() {
        return Err(Error::domain("simultaneous RB needs at least one gate duration"));
    }
    let mut points = Vec::new();
    for (i, &t) in cfg.tau_values.iter().enumerate() {
        let lengths = cfg.lengths_for(i);
        let iso = pair_curve(cfg, &lengths, t, 0.0, i as u64)?;
        let sim = pair_curve(cfg, &lengths, t, omega_zz, i as u64)?;
        let (fi, fs) = analyze_interleaved_offsets(cfg, &iso, &sim)?;
        let excess = (fs.r - fi.r) / PHYSICAL_GATES_PER_CLIFFORD;
        let excess_err = fs.r_err.hypot(fi.r_err) / PHYSICAL_GATES_PER_CLIFFORD;
        points.push(SimultaneousPoint { t_gate: t, isolated: fi, simultaneous: fs, excess, excess_err, curves: (iso, sim) });
    }
    let excess = DecayCurve::new(
        cfg.tau_values.clone(),
        points.iter().map(|p| p.excess).collect(),
        points.iter().map(|p| p.excess_err).collect(),
        cfg.n_sequences,
        CurveKind::IdleError,
    )?;
    Ok(SimultaneousRb { omega_zz, points, excess })
}

/// Coefficient `c` of `excess = c·(Ω_ZZ t_gate/2π)²`; the random-phase model predicts π²/6.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZzQuadraticFit {
    pub coefficient: f64,
    pub coefficient_err: f64,
    pub report: FitReport,
}

pub fn fit_zz_quadratic(excess: &DecayCurve, omega_zz: f64) -> Result<ZzQuadraticFit> {
    let x: Vec<f64> = excess.x.iter().map(|t| omega_zz * t / (2.0 * std::f64::consts::PI)).collect();
    let data = DecayCurve { x, ..excess.clone() }.to_fit_data()?;
    let model = PowerSeriesModel::new(&[2], &["c"]);
    let report = fit_auto(&model, &data, &FitOptions::default())?;
    Ok(ZzQuadraticFit { coefficient: report.params[0], coefficient_err: report.uncertainties[0], report })
}
