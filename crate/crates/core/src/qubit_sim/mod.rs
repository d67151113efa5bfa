//! Clifford-level simulation of one qubit (and a ZZ-coupled pair) as density
//! matrices, with a Bloch-vector fast path for a single qubit. Noise enters only through Z phases and amplitude damping; all
//! randomness lives in the noise traces.

mod bloch;
mod clifford;
mod gate;
mod state;

pub use bloch::BlochVector;
pub use clifford::{clifford_table, equal_up_to_phase, rotation, CliffordOp, CliffordTable, PhysicalGate, Unitary2};
pub use gate::{Composite, GateEvent, GateKind, Segment};
pub use state::{
    apply_amplitude_damping, apply_clifford, apply_unitary, apply_z_phase, evolve_zz, measure_error,
    measure_error_two, QubitState, Spam, TwoQubitState,
};

/// Inverse of an ordered Clifford sequence (see [`CliffordTable::inverse_of_sequence`]).
pub fn inverse_of_sequence(seq: &[usize]) -> crate::Result<&'static CliffordOp> {
    clifford_table().inverse_of_sequence(seq)
}
