use serde::{Deserialize, Serialize};

use super::clifford::{clifford_table, rotation, PhysicalGate};
use crate::error::{Error, Result};

/// Two-pulse composite gates with an idle split around the pulses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Composite {
    /// τ/4 – X – τ/2 – X – τ/4.
    Xx,
    /// τ/4 – Y – τ/2 – X – τ/4.
    Yx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    Clifford,
    Idle,
    EchoPi,
    ZDetune,
    Composite(Composite),
}

/// An operation that can be interleaved into an RB sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GateEvent {
    /// A perfect, instantaneous Clifford.
    Clifford { index: usize },
    /// Free evolution for `duration` seconds.
    Idle { duration: f64 },
    /// Echo idle: `duration/2` – X – `duration/2`.
    EchoIdle { duration: f64 },
    /// Z rotation by `angle` (a multiple of π/2) made by detuning the qubit for `duration`.
    ZDetune { duration: f64, angle: f64 },
    Composite { composite: Composite, duration: f64 },
}

/// Elementary step of a gate's time line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment {
    /// Free evolution; noise acts.
    Wait(f64),
    /// Instantaneous ideal pulse.
    Pulse(PhysicalGate),
    /// Instantaneous ideal Clifford.
    Clifford(usize),
    /// Ideal Z rotation (rad).
    ZRotation(f64),
}

impl GateEvent {
    pub fn kind(&self) -> GateKind {
        match self {
            GateEvent::Clifford { .. } => GateKind::Clifford,
            GateEvent::Idle { .. } => GateKind::Idle,
            GateEvent::EchoIdle { .. } => GateKind::EchoPi,
            GateEvent::ZDetune { .. } => GateKind::ZDetune,
            GateEvent::Composite { composite, .. } => GateKind::Composite(*composite),
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            GateEvent::Clifford { .. } => 0.0,
            GateEvent::Idle { duration }
            | GateEvent::EchoIdle { duration }
            | GateEvent::ZDetune { duration, .. }
            | GateEvent::Composite { duration, .. } => *duration,
        }
    }

    pub fn clifford_index(&self) -> Option<usize> {
        match self {
            GateEvent::Clifford { index } => Some(*index),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.duration();
        if !(d.is_finite() && d >= 0.0) {
            return Err(Error::domain(format!("gate duration must be finite and >= 0, got {d}")));
        }
        if let GateEvent::Clifford { index } = self {
            if *index >= 24 {
                return Err(Error::domain(format!("Clifford index {index} out of range")));
            }
        }
        self.ideal_clifford().map(|_| ())
    }

    /// Time line of the gate; echo pulses sit at the midpoint of the idle.
    pub fn segments(&self) -> Vec<Segment> {
        match *self {
            GateEvent::Clifford { index } => vec![Segment::Clifford(index)],
            GateEvent::Idle { duration } => vec![Segment::Wait(duration)],
            GateEvent::EchoIdle { duration } => vec![
                Segment::Wait(duration / 2.0),
                Segment::Pulse(PhysicalGate::X180),
                Segment::Wait(duration / 2.0),
            ],
            GateEvent::ZDetune { duration, angle } => vec![Segment::Wait(duration), Segment::ZRotation(angle)],
            GateEvent::Composite { composite, duration } => {
                let first = match composite {
                    Composite::Xx => PhysicalGate::X180,
                    Composite::Yx => PhysicalGate::Y180,
                };
                vec![
                    Segment::Wait(duration / 4.0),
                    Segment::Pulse(first),
                    Segment::Wait(duration / 2.0),
                    Segment::Pulse(PhysicalGate::X180),
                    Segment::Wait(duration / 4.0),
                ]
            }
        }
    }

    /// Clifford implemented by the noiseless gate.
    pub fn ideal_clifford(&self) -> Result<usize> {
        let table = clifford_table();
        let mut u = super::clifford::Unitary2::identity();
        for seg in self.segments() {
            match seg {
                Segment::Wait(_) => {}
                Segment::Pulse(g) => u = g.unitary() * u,
                Segment::Clifford(i) => {
                    if i >= table.len() {
                        return Err(Error::domain(format!("Clifford index {i} out of range")));
                    }
                    u = table.get(i).unitary * u
                }
                Segment::ZRotation(a) => u = rotation('z', a) * u,
            }
        }
        table
            .index_of(&u)
            .ok_or_else(|| Error::domain(format!("{self:?} does not implement a Clifford")))
    }
}
