use nalgebra::{Matrix3, Vector3};

use super::state::QubitState;

/// Bloch-vector form of a single-qubit state, `ρ = (I + r·σ)/2`. Carries the
/// same physics as [`QubitState`] for unitaries, Z phases and amplitude
/// damping at a fraction of the cost; the Monte-Carlo drivers use it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochVector(pub Vector3<f64>);

impl BlochVector {
    pub fn ground() -> Self {
        Self(Vector3::new(0.0, 0.0, 1.0))
    }

    pub fn excited() -> Self {
        Self(Vector3::new(0.0, 0.0, -1.0))
    }

    pub fn from_state(s: &QubitState) -> Self {
        let [x, y, z] = s.bloch();
        Self(Vector3::new(x, y, z))
    }

    pub fn to_state(&self) -> QubitState {
        QubitState::from_bloch(self.0.x, self.0.y, self.0.z)
    }

    #[inline]
    pub fn rotate(&mut self, r: &Matrix3<f64>) {
        self.0 = r * self.0;
    }

    /// `exp(−iφZ/2)`: rotation of the transverse part by `+φ` about z.
    #[inline]
    pub fn z_phase(&mut self, phi: f64) {
        let (s, c) = phi.sin_cos();
        let (x, y) = (self.0.x, self.0.y);
        self.0.x = c * x - s * y;
        self.0.y = s * x + c * y;
    }

    /// Amplitude damping toward `|0⟩` over `dt`.
    #[inline]
    pub fn damp(&mut self, dt: f64, t1: f64) {
        if dt <= 0.0 {
            return;
        }
        let keep = (-dt / t1).exp();
        let c = keep.sqrt();
        self.0.x *= c;
        self.0.y *= c;
        self.0.z = 1.0 - (1.0 - self.0.z) * keep;
    }

    /// Population of level 0 or 1.
    pub fn population(&self, level: usize) -> f64 {
        let p0 = 0.5 * (1.0 + self.0.z);
        if level == 0 {
            p0
        } else {
            1.0 - p0
        }
    }
}
