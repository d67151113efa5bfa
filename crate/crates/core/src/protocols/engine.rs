use nalgebra::Matrix3;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::noise_gen::{NoiseRealization, NoiseSpec, RngStream};
use crate::qubit_sim::{clifford_table, BlochVector, GateEvent, PhysicalGate, Segment, Spam};

/// Child-stream tags of one trial.
pub(crate) const TAG_CLIFFORDS: u64 = 1;
pub(crate) const TAG_NOISE: u64 = 2;
pub(crate) const TAG_WHITE: u64 = 3;
pub(crate) const TAG_SHOTS: u64 = 4;

/// Gate time line lowered to Bloch operations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Step {
    Wait(f64),
    Rotate(usize),
    ZPhase(f64),
}

pub(crate) fn pulse_clifford(g: PhysicalGate) -> usize {
    clifford_table().index_of(&g.unitary()).expect("physical pulses are Cliffords")
}

/// A gate compiled for the Bloch engine.
#[derive(Debug, Clone)]
pub(crate) struct CompiledGate {
    pub steps: Vec<Step>,
    pub clifford: usize,
    pub duration: f64,
}

impl CompiledGate {
    pub fn new(gate: &GateEvent) -> Result<Self> {
        gate.validate()?;
        let steps = gate
            .segments()
            .into_iter()
            .map(|s| match s {
                Segment::Wait(d) => Step::Wait(d),
                Segment::Pulse(p) => Step::Rotate(pulse_clifford(p)),
                Segment::Clifford(i) => Step::Rotate(i),
                Segment::ZRotation(a) => Step::ZPhase(a),
            })
            .collect();
        Ok(Self { steps, clifford: gate.ideal_clifford()?, duration: gate.duration() })
    }
}

/// Bloch vector driven by one noise realization along a running clock.
pub(crate) struct Evolution<'a, R: Rng> {
    pub state: BlochVector,
    pub t: f64,
    noise: Option<&'a NoiseRealization>,
    t1: Option<f64>,
    white: R,
}

impl<'a, R: Rng> Evolution<'a, R> {
    pub fn new(state: BlochVector, noise: Option<&'a NoiseRealization>, t1: Option<f64>, white: R) -> Self {
        Self { state, t: 0.0, noise, t1, white }
    }

    pub fn wait(&mut self, d: f64) -> Result<()> {
        if d <= 0.0 {
            return Ok(());
        }
        if let Some(n) = self.noise {
            let phi = n.phase(self.t, self.t + d, &mut self.white)?;
            self.state.z_phase(phi);
        }
        if let Some(t1) = self.t1 {
            self.state.damp(d, t1);
        }
        self.t += d;
        Ok(())
    }

    pub fn rotate(&mut self, r: &Matrix3<f64>) {
        self.state.rotate(r);
    }

    pub fn step(&mut self, s: Step) -> Result<()> {
        match s {
            Step::Wait(d) => self.wait(d),
            Step::Rotate(c) => {
                self.rotate(&clifford_table().get(c).bloch_rotation);
                Ok(())
            }
            Step::ZPhase(a) => {
                self.state.z_phase(a);
                Ok(())
            }
        }
    }
}

/// Realization covering `duration`, or `None` when nothing dephases or no time elapses.
pub(crate) fn realize(noise: &NoiseSpec, duration: f64, stream: RngStream) -> Result<Option<NoiseRealization>> {
    if noise.is_dephasing_free() || duration <= 0.0 {
        return Ok(None);
    }
    noise.realize(duration, stream.child(TAG_NOISE)).map(Some)
}

/// Readout of an ideal error probability: SPAM, then optional projective shots.
pub(crate) fn read_out(p_err: f64, spam: Option<Spam>, shots: Option<u64>, stream: RngStream) -> Result<f64> {
    let p = spam.map_or(p_err, |s| s.observe_error(p_err)).clamp(0.0, 1.0);
    match shots {
        None => Ok(p),
        Some(n) => {
            let b = Binomial::new(n, p).map_err(|e| Error::domain(format!("shot sampling: {e}")))?;
            Ok(b.sample(&mut stream.child(TAG_SHOTS).rng()) as f64 / n as f64)
        }
    }
}

/// One RB sequence: `m` random Cliffords, each followed by the interleaved
/// gate if any, then the recovery Clifford.
#[derive(Debug, Clone, Copy)]
pub(crate) struct RbSequence<'a> {
    pub m: usize,
    pub gate: Option<&'a CompiledGate>,
    /// Duration of one physical pulse slot of a Clifford.
    pub slot_time: f64,
    pub noise: &'a NoiseSpec,
    pub spam: Option<Spam>,
    pub shots: Option<u64>,
}

impl RbSequence<'_> {
    /// Observed survival probability of the trial at `stream`.
    pub fn survival(&self, stream: RngStream) -> Result<f64> {
        let table = clifford_table();
        let mut crng = stream.child(TAG_CLIFFORDS).rng();
        let seq: Vec<usize> = (0..self.m).map(|_| crng.random_range(0..table.len())).collect();
        let gate_clifford = self.gate.map_or(0, |g| g.clifford);
        let mut net = 0;
        for &c in &seq {
            net = table.then(table.then(net, c), gate_clifford);
        }
        let recovery = table.inverse(net);
        let slots: usize =
            seq.iter().map(|&c| table.get(c).physical_gate_count).sum::<usize>() + table.get(recovery).physical_gate_count;
        let duration = slots as f64 * self.slot_time + self.m as f64 * self.gate.map_or(0.0, |g| g.duration);
        let realization = realize(self.noise, duration, stream)?;
        let white = stream.child(TAG_WHITE).rng();
        let mut ev = Evolution::new(BlochVector::ground(), realization.as_ref(), self.noise.t1, white);
        let clifford = |ev: &mut Evolution<_>, c: usize| -> Result<()> {
            let op = table.get(c);
            ev.rotate(&op.bloch_rotation);
            ev.wait(op.physical_gate_count as f64 * self.slot_time)
        };
        for &c in &seq {
            clifford(&mut ev, c)?;
            if let Some(g) = self.gate {
                for &s in &g.steps {
                    ev.step(s)?;
                }
            }
        }
        clifford(&mut ev, recovery)?;
        let p_err = (1.0 - ev.state.population(0)).clamp(0.0, 1.0);
        Ok(1.0 - read_out(p_err, self.spam, self.shots, stream)?)
    }
}

/// Evaluates `f(0..n)` in parallel; results keep index order so that reductions
/// are independent of scheduling.
pub(crate) fn par_map<T: Send, F: Fn(usize) -> Result<T> + Sync>(n: usize, f: F) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(&f).collect()
}

/// Sample mean and standard error of the mean.
pub(crate) fn mean_se(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
