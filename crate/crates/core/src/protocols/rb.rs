use log::warn;
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::config::{OffsetMode, ProtocolConfig};
use super::curve::{CurveKind, DecayCurve};
use super::engine::{mean_se, par_map, CompiledGate, RbSequence};
use crate::error::{Error, Result};
use crate::fitting::{fit_auto, DecayModel, FitData, FitModel, FitOptions, FitReport};
use crate::noise_gen::RngStream;
use crate::qubit_sim::GateEvent;

/// Stream tag of RB runs; every point, length and sequence descends from it.
const TAG_RB: u64 = 0x5242;

/// Offsets of `F(m) = A·p^m + B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayOffsets {
    /// Both fitted.
    Free,
    /// `A` fitted, `B` held.
    KnownB(f64),
    /// Held at `(A, B)`.
    Known(f64, f64),
}

/// Fitted RB decay; `r = (1 − p)/2` is the single-qubit error per step.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub p_err: f64,
    pub r: f64,
    pub r_err: f64,
    /// `None` when the curve sits exactly at `A + B` (no decay, `p = 1`).
    pub report: Option<FitReport>,
}

/// Fits `A·p^m + B` with all three parameters free.
pub fn fit_decay(curve: &DecayCurve) -> Result<DecayFit> {
    fit_decay_with(curve, DecayOffsets::Free)
}

/// Fit of `A·p^m + B` with `0 < p ≤ 1`.
///
/// The estimate uses equal weights: per-length sample variances of the skewed
/// survival distribution are correlated with the sample means, and weighting
/// by them biases `r` low (−0.5% at 10³ sequences). Uncertainties are the
/// sandwich covariance `(JᵀJ)⁻¹ Jᵀ diag(σ²) J (JᵀJ)⁻¹` with the curve's SEs.
pub fn fit_decay_with(curve: &DecayCurve, offsets: DecayOffsets) -> Result<DecayFit> {
    let needed = match offsets {
        DecayOffsets::Free => 3,
        DecayOffsets::KnownB(_) => 2,
        DecayOffsets::Known(..) => 1,
    };
    if curve.len() < needed {
        return Err(Error::domain(format!("decay fit needs >= {needed} points, got {}", curve.len())));
    }
    if let DecayOffsets::Known(a, b) = offsets {
        // A curve pinned at A + B carries no decay; the fit would push p onto its bound.
        if curve.y.iter().all(|y| (y - (a + b)).abs() <= 1e-12) {
            return Ok(DecayFit { a, p: 1.0, b, p_err: 0.0, r: 0.0, r_err: 0.0, report: None });
        }
    }
    let data = FitData::new(curve.x.clone(), curve.y.clone(), None)?;
    let fixed = match offsets {
        DecayOffsets::Free => vec![None, None, None],
        DecayOffsets::Known(a, b) => vec![Some(a), None, Some(b)],
        DecayOffsets::KnownB(b) => vec![None, None, Some(b)],
    };
    let opts = FitOptions { fixed: fixed.clone(), scale_covariance_without_sigma: false, ..Default::default() };
    let mut report = fit_auto(&DecayModel, &data, &opts)?;
    if !report.converged {
        return Err(Error::Fit(format!("RB decay fit did not converge\n{}", report.to_text())));
    }
    sandwich_covariance(&mut report, &fixed, curve)?;
    let (a, p, b) = (report.params[0], report.params[1], report.params[2]);
    let p_err = report.uncertainties[1];
    Ok(DecayFit { a, p, b, p_err, r: (1.0 - p) / 2.0, r_err: p_err / 2.0, report: Some(report) })
}

/// Replaces the report's covariance by the sandwich form for an equal-weight
/// fit with per-point standard errors `curve.yerr`; `chi2` uses those errors.
fn sandwich_covariance(report: &mut FitReport, fixed: &[Option<f64>], curve: &DecayCurve) -> Result<()> {
    let free: Vec<usize> = (0..fixed.len()).filter(|&i| fixed[i].is_none()).collect();
    let theta = report.params.clone();
    let j = DMatrix::from_fn(curve.len(), free.len(), |r, c| {
        DecayModel.gradient(&theta, curve.x[r]).expect("analytic decay gradient")[free[c]]
    });
    let jtj_inv = (j.transpose() * &j)
        .try_inverse()
        .ok_or_else(|| Error::Fit(format!("RB decay fit is singular\n{}", report.to_text())))?;
    let sigma2 = DMatrix::from_diagonal(&DVector::from_iterator(curve.len(), curve.yerr.iter().map(|e| e * e)));
    let cov = &jtj_inv * j.transpose() * sigma2 * &j * &jtj_inv;
    let n = theta.len();
    report.covariance = vec![vec![0.0; n]; n];
    report.uncertainties = vec![0.0; n];
    for (a, &i) in free.iter().enumerate() {
        for (b, &k) in free.iter().enumerate() {
            report.covariance[i][k] = cov[(a, b)];
        }
        report.uncertainties[i] = cov[(a, a)].max(0.0).sqrt();
    }
    report.chi2 = curve
        .x
        .iter()
        .zip(&curve.y)
        .zip(&curve.yerr)
        .filter(|(_, e)| **e > 0.0)
        .map(|((m, y), e)| ((y - DecayModel.predict(&theta, *m)) / e).powi(2))
        .sum();
    report.residual_norm = report.chi2.sqrt();
    Ok(())
}

/// Per-gate error from interleaved and reference decays, `(1 − p_gate/p_ref)/2`.
pub fn extract_interleaved_error(p_ref: f64, p_gate: f64) -> Result<f64> {
    if !(p_ref > 0.0) || !p_ref.is_finite() || !p_gate.is_finite() {
        return Err(Error::domain(format!("p_ref must be > 0, got {p_ref}")));
    }
    if !(0.0 < p_gate && p_gate <= p_ref && p_ref <= 1.0) {
        warn!("interleaved RB expects 0 < p_gate <= p_ref <= 1, got p_gate = {p_gate}, p_ref = {p_ref}");
    }
    Ok((1.0 - p_gate / p_ref) / 2.0)
}

/// Standard error of [`extract_interleaved_error`] from independent errors on both decays.
pub fn interleaved_error_se(p_ref: f64, p_ref_err: f64, p_gate: f64, p_gate_err: f64) -> f64 {
    0.5 * ((p_gate_err / p_ref).powi(2) + (p_gate * p_ref_err / (p_ref * p_ref)).powi(2)).sqrt()
}

/// Removes the relaxation share `τ/(3T₁)`, floored at zero.
pub fn subtract_t1(r: f64, tau: f64, t1: f64) -> Result<f64> {
    if !(t1 > 0.0) {
        return Err(Error::domain(format!("t1 must be > 0, got {t1}")));
    }
    let d = r - tau / (3.0 * t1);
    if d < 0.0 {
        warn!("T1 subtraction went negative ({d:e}) at tau = {tau:e}; floored at 0");
        return Ok(0.0);
    }
    Ok(d)
}

fn offsets(cfg: &ProtocolConfig) -> DecayOffsets {
    let (a, b) = cfg.rb_offsets();
    match cfg.offsets {
        OffsetMode::Known => DecayOffsets::Known(a, b),
        OffsetMode::FreeA => DecayOffsets::KnownB(b),
        OffsetMode::Free => DecayOffsets::Free,
    }
}

/// Survival curve at `point` (which selects the random streams), for the
/// given lengths and optional interleaved gate.
fn rb_curve(cfg: &ProtocolConfig, gate: Option<&CompiledGate>, lengths: &[usize], point: u64) -> Result<DecayCurve> {
    let base = RngStream::new(cfg.seed, TAG_RB);
    let mut y = Vec::with_capacity(lengths.len());
    let mut yerr = Vec::with_capacity(lengths.len());
    for (mi, &m) in lengths.iter().enumerate() {
        let seq = RbSequence {
            m,
            gate,
            slot_time: cfg.clifford_slot_time,
            noise: &cfg.noise,
            spam: cfg.spam,
            shots: cfg.shots,
        };
        let v = par_map(cfg.n_sequences, |s| seq.survival(base.descend(&[point, mi as u64, s as u64])))?;
        let (mean, se) = mean_se(&v);
        y.push(mean);
        yerr.push(se);
    }
    DecayCurve::new(lengths.iter().map(|&m| m as f64).collect(), y, yerr, cfg.n_sequences, CurveKind::RbFidelity)
}

/// Standard RB: survival vs number of Cliffords.
pub fn run_rb_reference(cfg: &ProtocolConfig) -> Result<DecayCurve> {
    cfg.validate()?;
    rb_curve(cfg, None, &cfg.lengths_for(0), 0)
}

/// Reference and interleaved curves drawn with the same Clifford strings and noise streams.
pub fn run_interleaved_rb(cfg: &ProtocolConfig, gate: &GateEvent) -> Result<(DecayCurve, DecayCurve)> {
    cfg.validate()?;
    let lengths = cfg.lengths_for(0);
    interleaved_pair(cfg, &CompiledGate::new(gate)?, &lengths, 0)
}

fn interleaved_pair(
    cfg: &ProtocolConfig,
    gate: &CompiledGate,
    lengths: &[usize],
    point: u64,
) -> Result<(DecayCurve, DecayCurve)> {
    Ok((rb_curve(cfg, None, lengths, point)?, rb_curve(cfg, Some(gate), lengths, point)?))
}

/// Interleaved-RB result for one gate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterleavedPoint {
    /// Idle or gate duration (s).
    pub tau: f64,
    pub reference: DecayFit,
    pub interleaved: DecayFit,
    pub r: f64,
    pub r_err: f64,
    #[serde(skip)]
    pub curves: (DecayCurve, DecayCurve),
}

/// Fits both curves and extracts the gate error.
pub fn analyze_interleaved(
    cfg: &ProtocolConfig,
    tau: f64,
    reference: DecayCurve,
    interleaved: DecayCurve,
) -> Result<InterleavedPoint> {
    let (rf, gf) = analyze_interleaved_offsets(cfg, &reference, &interleaved)?;
    let r = extract_interleaved_error(rf.p, gf.p)?;
    let r_err = interleaved_error_se(rf.p, rf.p_err, gf.p, gf.p_err);
    Ok(InterleavedPoint { tau, reference: rf, interleaved: gf, r, r_err, curves: (reference, interleaved) })
}

/// Fits a reference/interleaved pair with the offsets the config implies.
pub(crate) fn analyze_interleaved_offsets(
    cfg: &ProtocolConfig,
    reference: &DecayCurve,
    interleaved: &DecayCurve,
) -> Result<(DecayFit, DecayFit)> {
    let off = offsets(cfg);
    Ok((fit_decay_with(reference, off)?, fit_decay_with(interleaved, off)?))
}

/// Idle-error scan: interleaved RB at every τ of the config.
#[derive(Debug, Clone, PartialEq)]
pub struct IdleScan {
    /// `idle_error` vs τ.
    pub curve: DecayCurve,
    pub points: Vec<InterleavedPoint>,
}

/// Runs interleaved RB with `make(τ)` at every configured τ.
pub fn run_idle_scan(cfg: &ProtocolConfig, make: impl Fn(f64) -> GateEvent) -> Result<IdleScan> {
    cfg.validate()?;
    if cfg.tau_values.is_empty() {
        return Err(Error::domain("idle scan needs at least one tau value"));
    }
    let mut points = Vec::with_capacity(cfg.tau_values.len());
    for (i, &tau) in cfg.tau_values.iter().enumerate() {
        let gate = CompiledGate::new(&make(tau))?;
        let (r, g) = interleaved_pair(cfg, &gate, &cfg.lengths_for(i), i as u64)?;
        points.push(analyze_interleaved(cfg, tau, r, g)?);
    }
    let curve = DecayCurve::new(
        cfg.tau_values.clone(),
        points.iter().map(|p| p.r).collect(),
        points.iter().map(|p| p.r_err).collect(),
        cfg.n_sequences,
        CurveKind::IdleError,
    )?;
    Ok(IdleScan { curve, points })
}

/// RB Ramsey: free idle of length τ after every Clifford.
pub fn rb_ramsey(cfg: &ProtocolConfig) -> Result<IdleScan> {
    run_idle_scan(cfg, |tau| GateEvent::Idle { duration: tau })
}

/// RB echo: τ/2 – X – τ/2 after every Clifford.
pub fn rb_echo(cfg: &ProtocolConfig) -> Result<IdleScan> {
    run_idle_scan(cfg, |tau| GateEvent::EchoIdle { duration: tau })
}
