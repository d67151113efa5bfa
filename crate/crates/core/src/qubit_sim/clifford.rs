use std::collections::VecDeque;
use std::sync::OnceLock;

use nalgebra::{Matrix2, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Unitary2 = Matrix2<Complex64>;

const C0: Complex64 = Complex64::new(0.0, 0.0);

/// Microwave pulses from which the Clifford gates are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhysicalGate {
    X90,
    Xm90,
    Y90,
    Ym90,
    X180,
    Y180,
}

impl PhysicalGate {
    pub const ALL: [PhysicalGate; 6] = [
        PhysicalGate::X90,
        PhysicalGate::Xm90,
        PhysicalGate::Y90,
        PhysicalGate::Ym90,
        PhysicalGate::X180,
        PhysicalGate::Y180,
    ];

    /// `exp(−iθσ/2)` for the pulse's axis σ and angle θ.
    pub fn unitary(&self) -> Unitary2 {
        let (axis, angle) = match self {
            PhysicalGate::X90 => ('x', std::f64::consts::FRAC_PI_2),
            PhysicalGate::Xm90 => ('x', -std::f64::consts::FRAC_PI_2),
            PhysicalGate::Y90 => ('y', std::f64::consts::FRAC_PI_2),
            PhysicalGate::Ym90 => ('y', -std::f64::consts::FRAC_PI_2),
            PhysicalGate::X180 => ('x', std::f64::consts::PI),
            PhysicalGate::Y180 => ('y', std::f64::consts::PI),
        };
        rotation(axis, angle)
    }
}

/// `exp(−iθσ/2)` about `x`, `y` or `z`.
pub fn rotation(axis: char, angle: f64) -> Unitary2 {
    let c = Complex64::new((angle / 2.0).cos(), 0.0);
    let s = (angle / 2.0).sin();
    match axis {
        'x' => Matrix2::new(c, Complex64::new(0.0, -s), Complex64::new(0.0, -s), c),
        'y' => Matrix2::new(c, Complex64::new(-s, 0.0), Complex64::new(s, 0.0), c),
        'z' => Matrix2::new(Complex64::new(c.re, -s), C0, C0, Complex64::new(c.re, s)),
        _ => panic!("unknown rotation axis {axis}"),
    }
}

/// True when `a = e^{iα} b` for some α.
pub fn equal_up_to_phase(a: &Unitary2, b: &Unitary2, tol: f64) -> bool {
    let overlap = (a.adjoint() * b).trace().norm();
    (overlap - 2.0).abs() < tol
}

/// One element of the single-qubit Clifford group.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordOp {
    pub index: usize,
    pub unitary: Unitary2,
    /// Pulses in application order; empty for the identity.
    pub decomposition: Vec<PhysicalGate>,
    /// Pulse slots the gate occupies; the identity is one idle slot.
    pub physical_gate_count: usize,
    /// Action on the Bloch vector.
    pub bloch_rotation: Matrix3<f64>,
}

/// The 24 Cliffords with composition and inverse tables.
#[derive(Debug, Clone)]
pub struct CliffordTable {
    ops: Vec<CliffordOp>,
    // then[a][b]: apply a, then b
    then: [[u8; 24]; 24],
    inverse: [u8; 24],
}

fn pauli(i: usize) -> Unitary2 {
    let one = Complex64::new(1.0, 0.0);
    let i_ = Complex64::new(0.0, 1.0);
    match i {
        0 => Matrix2::new(C0, one, one, C0),
        1 => Matrix2::new(C0, -i_, i_, C0),
        _ => Matrix2::new(one, C0, C0, -one),
    }
}

fn bloch_rotation(u: &Unitary2) -> Matrix3<f64> {
    let mut r = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            r[(i, j)] = 0.5 * (pauli(i) * u * pauli(j) * u.adjoint()).trace().re;
        }
    }
    r.map(|x| x.round())
}

impl CliffordTable {
    fn build() -> Self {
        let mut ops: Vec<CliffordOp> = Vec::with_capacity(24);
        let mut queue = VecDeque::new();
        let identity = Unitary2::identity();
        ops.push(CliffordOp {
            index: 0,
            unitary: identity,
            decomposition: vec![],
            physical_gate_count: 1,
            bloch_rotation: Matrix3::identity(),
        });
        queue.push_back(0usize);
        while let Some(i) = queue.pop_front() {
            for g in PhysicalGate::ALL {
                let u = g.unitary() * ops[i].unitary;
                if ops.iter().any(|op| equal_up_to_phase(&op.unitary, &u, 1e-9)) {
                    continue;
                }
                let mut decomposition = ops[i].decomposition.clone();
                decomposition.push(g);
                let index = ops.len();
                ops.push(CliffordOp {
                    index,
                    unitary: u,
                    physical_gate_count: decomposition.len(),
                    decomposition,
                    bloch_rotation: bloch_rotation(&u),
                });
                queue.push_back(index);
            }
        }
        assert_eq!(ops.len(), 24, "Clifford closure must have 24 elements");
        let find = |u: &Unitary2| -> u8 {
            ops.iter().position(|op| equal_up_to_phase(&op.unitary, u, 1e-9)).expect("closed group") as u8
        };
        let mut then = [[0u8; 24]; 24];
        let mut inverse = [0u8; 24];
        for a in 0..24 {
            for b in 0..24 {
                then[a][b] = find(&(ops[b].unitary * ops[a].unitary));
            }
            inverse[a] = find(&ops[a].unitary.adjoint());
        }
        Self { ops, then, inverse }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn ops(&self) -> &[CliffordOp] {
        &self.ops
    }

    pub fn get(&self, index: usize) -> &CliffordOp {
        &self.ops[index]
    }

    pub const IDENTITY: usize = 0;

    /// Index of "apply `first`, then `second`".
    pub fn then(&self, first: usize, second: usize) -> usize {
        self.then[first][second] as usize
    }

    pub fn inverse(&self, index: usize) -> usize {
        self.inverse[index] as usize
    }

    /// Index of the element equal to `u` up to a global phase.
    pub fn index_of(&self, u: &Unitary2) -> Option<usize> {
        self.ops.iter().position(|op| equal_up_to_phase(&op.unitary, u, 1e-9))
    }

    /// Net element of a sequence applied left to right.
    pub fn product(&self, seq: &[usize]) -> usize {
        seq.iter().fold(Self::IDENTITY, |acc, &c| self.then(acc, c))
    }

    /// The Clifford that undoes the ordered sequence.
    pub fn inverse_of_sequence(&self, seq: &[usize]) -> Result<&CliffordOp> {
        if seq.is_empty() {
            return Err(Error::domain("cannot invert an empty sequence"));
        }
        if let Some(&bad) = seq.iter().find(|&&c| c >= self.len()) {
            return Err(Error::domain(format!("Clifford index {bad} out of range")));
        }
        Ok(self.get(self.inverse(self.product(seq))))
    }

    /// Mean number of pulse slots per Clifford.
    pub fn mean_physical_gate_count(&self) -> f64 {
        self.ops.iter().map(|op| op.physical_gate_count as f64).sum::<f64>() / self.len() as f64
    }
}

/// The canonical table, built once by breadth-first closure over the pulses
/// {X90, −X90, Y90, −Y90, X180, Y180}, so every decomposition is a shortest one.
pub fn clifford_table() -> &'static CliffordTable {
    static TABLE: OnceLock<CliffordTable> = OnceLock::new();
    TABLE.get_or_init(CliffordTable::build)
}
