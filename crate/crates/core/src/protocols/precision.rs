use serde::Serialize;

use super::coherence::run_ramsey;
use super::config::ProtocolConfig;
use super::rb::{run_idle_scan, subtract_t1};
use crate::error::{Error, Result};
use crate::qubit_sim::GateEvent;

/// Visibility at one idle time inferred two ways with the same number of shots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrecisionComparison {
    pub tau: f64,
    /// Projective shots spent by each method.
    pub shots: u64,
    pub rb_r: f64,
    pub rb_r_err: f64,
    /// Ramsey visibility implied by the RB idle error, on the observed (SPAM) scale.
    pub rb_visibility: f64,
    pub rb_se: f64,
    pub ramsey_visibility: f64,
    pub ramsey_se: f64,
    /// `ramsey_se / rb_se`.
    pub ratio: f64,
}

/// Runs interleaved RB with an idle `tau` (reference and interleaved curves
/// over `cfg`'s lengths for the first τ, `cfg.shots` per sequence) and a direct
/// Ramsey measurement at `tau` given the same total shots in trials of
/// `ramsey_shots_per_trial` (rounded down to an even number).
///
/// The RB error maps to a visibility through `r − τ/3T₁ = ⟨φ²⟩/6` and
/// `V = exp(−⟨φ²⟩/2)·exp(−τ/2T₁)`, then through the SPAM scale `a·V + b`.
pub fn compare_precision(cfg: &ProtocolConfig, tau: f64, ramsey_shots_per_trial: u64) -> Result<PrecisionComparison> {
    let shots = cfg.shots.ok_or_else(|| Error::domain("precision comparison needs shots per sequence"))?;
    if ramsey_shots_per_trial < 2 {
        return Err(Error::domain("ramsey_shots_per_trial must be >= 2 (one per phase-cycle setting)"));
    }
    // Phase cycling spends shots in pairs.
    let per_trial = ramsey_shots_per_trial / 2 * 2;
    let rb_cfg = ProtocolConfig { tau_values: vec![tau], ..cfg.clone() };
    let lengths = rb_cfg.lengths_for(0);
    let budget = 2 * lengths.len() as u64 * cfg.n_sequences as u64 * shots;
    let scan = run_idle_scan(&rb_cfg, |t| GateEvent::Idle { duration: t })?;
    let point = &scan.points[0];
    let (a, b) = cfg.spam.map_or((1.0, 0.0), |s| (s.a, s.b));
    let (r_phase, t1_factor) = match cfg.noise.t1 {
        Some(t1) => (subtract_t1(point.r, tau, t1)?, (-tau / (2.0 * t1)).exp()),
        None => (point.r, 1.0),
    };
    let v = (-3.0 * r_phase).exp() * t1_factor;
    let rb_visibility = a * v + b;
    let rb_se = a.abs() * 3.0 * v * point.r_err;

    let trials = (budget / per_trial).max(2) as usize;
    let ramsey_cfg = ProtocolConfig {
        tau_values: vec![tau],
        n_sequences: trials,
        shots: Some(per_trial),
        ..cfg.clone()
    };
    let ramsey = run_ramsey(&ramsey_cfg)?;
    Ok(PrecisionComparison {
        tau,
        shots: budget,
        rb_r: point.r,
        rb_r_err: point.r_err,
        rb_visibility,
        rb_se,
        ramsey_visibility: ramsey.y[0],
        ramsey_se: ramsey.yerr[0],
        ratio: ramsey.yerr[0] / rb_se,
    })
}
