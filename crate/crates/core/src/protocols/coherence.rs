use nalgebra::Vector3;
use rand_distr::{Binomial, Distribution};

use super::config::ProtocolConfig;
use super::curve::{CurveKind, DecayCurve};
use super::engine::{mean_se, par_map, pulse_clifford, read_out, realize, Evolution, Step, TAG_SHOTS, TAG_WHITE};
use crate::error::{Error, Result};
use crate::noise_gen::{NoiseSpec, RngStream};
use crate::qubit_sim::{BlochVector, PhysicalGate};

const TAG_RAMSEY: u64 = 0x5241;
const TAG_ECHO: u64 = 0x4543;
const TAG_T1: u64 = 0x5431;

/// In-phase transverse component of one trial, scaled by the readout
/// contrast. The reference direction is where the state ends up under the
/// known static detuning alone, i.e. the analysis pulse tracks that detuning.
fn in_phase_trial(cfg: &ProtocolConfig, steps: &[Step], stream: RngStream) -> Result<f64> {
    let duration: f64 = steps.iter().map(|s| if let Step::Wait(d) = s { *d } else { 0.0 }).sum();
    let realization = realize(&cfg.noise, duration, stream)?;
    let known = NoiseSpec { static_detuning_hz: cfg.noise.static_detuning_hz, ..Default::default() };
    let reference = realize(&known, duration, stream)?;
    let mut ev = Evolution::new(BlochVector::ground(), realization.as_ref(), cfg.noise.t1, stream.child(TAG_WHITE).rng());
    let mut ideal = Evolution::new(BlochVector::ground(), reference.as_ref(), None, stream.child(TAG_WHITE).rng());
    for &s in steps {
        ev.step(s)?;
        ideal.step(s)?;
    }
    let e = Vector3::new(ideal.state.0.x, ideal.state.0.y, 0.0).normalize();
    let a = cfg.spam.map_or(1.0, |s| s.a);
    let u = (a * Vector3::new(ev.state.0.x, ev.state.0.y, 0.0).dot(&e)).clamp(-1.0, 1.0);
    match cfg.shots {
        None => Ok(u),
        Some(n) => {
            // Phase-cycled readout: half the shots along +u, half along −u.
            let q = n / 2;
            let mut rng = stream.child(TAG_SHOTS).rng();
            let mut draw = |p: f64| -> Result<f64> {
                let b = Binomial::new(q, p.clamp(0.0, 1.0)).map_err(|e| Error::domain(format!("shot sampling: {e}")))?;
                Ok(b.sample(&mut rng) as f64)
            };
            let plus = draw(0.5 * (1.0 + u))?;
            let minus = draw(0.5 * (1.0 - u))?;
            Ok((plus - minus) / q as f64)
        }
    }
}

/// Visibility curve `V = a·⟨u⟩ + b` with `(a, b)` from the SPAM model (`(1, 0)`
/// without); `u` is the in-phase component, so `⟨u⟩` is the envelope.
fn visibility_curve(cfg: &ProtocolConfig, tag: u64, steps_for: impl Fn(f64) -> Vec<Step>) -> Result<DecayCurve> {
    cfg.validate()?;
    if cfg.tau_values.is_empty() {
        return Err(Error::domain("coherence experiment needs at least one tau value"));
    }
    if cfg.shots.is_some_and(|n| n < 2) {
        return Err(Error::domain("phase-cycled readout needs >= 2 shots per trial"));
    }
    let b = cfg.spam.map_or(0.0, |s| s.b);
    let base = RngStream::new(cfg.seed, tag);
    let mut y = Vec::new();
    let mut yerr = Vec::new();
    for (i, &tau) in cfg.tau_values.iter().enumerate() {
        let steps = steps_for(tau);
        let u = par_map(cfg.n_sequences, |s| in_phase_trial(cfg, &steps, base.descend(&[i as u64, s as u64])))?;
        let (mean, se) = mean_se(&u);
        y.push(mean + b);
        yerr.push(se);
    }
    DecayCurve::new(cfg.tau_values.clone(), y, yerr, cfg.n_sequences, CurveKind::Visibility)
}

/// Ramsey: X90 – τ – analysis pulse.
pub fn run_ramsey(cfg: &ProtocolConfig) -> Result<DecayCurve> {
    let x90 = pulse_clifford(PhysicalGate::X90);
    visibility_curve(cfg, TAG_RAMSEY, |tau| vec![Step::Rotate(x90), Step::Wait(tau)])
}

/// Hahn echo: X90 – τ/2 – X – τ/2 – analysis pulse.
pub fn run_spin_echo(cfg: &ProtocolConfig) -> Result<DecayCurve> {
    let x90 = pulse_clifford(PhysicalGate::X90);
    let x180 = pulse_clifford(PhysicalGate::X180);
    visibility_curve(cfg, TAG_ECHO, |tau| {
        vec![Step::Rotate(x90), Step::Wait(tau / 2.0), Step::Rotate(x180), Step::Wait(tau / 2.0)]
    })
}

/// Energy relaxation: prepare |1⟩, wait, read P₁ (with SPAM and shots if configured).
pub fn run_t1(cfg: &ProtocolConfig) -> Result<DecayCurve> {
    cfg.validate()?;
    if cfg.tau_values.is_empty() {
        return Err(Error::domain("T1 experiment needs at least one wait time"));
    }
    let base = RngStream::new(cfg.seed, TAG_T1);
    let mut y = Vec::new();
    let mut yerr = Vec::new();
    for (i, &t) in cfg.tau_values.iter().enumerate() {
        let v = par_map(cfg.n_sequences, |s| {
            let stream = base.descend(&[i as u64, s as u64]);
            let mut state = BlochVector::excited();
            if let Some(t1) = cfg.noise.t1 {
                state.damp(t, t1);
            }
            Ok(1.0 - read_out(state.population(0), cfg.spam, cfg.shots, stream)?)
        })?;
        let (m, se) = mean_se(&v);
        y.push(m);
        yerr.push(se);
    }
    DecayCurve::new(cfg.tau_values.clone(), y, yerr, cfg.n_sequences, CurveKind::P1Decay)
}
