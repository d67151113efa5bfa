use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::clifford::{CliffordOp, Unitary2};
use crate::error::{Error, Result};

const C0: Complex64 = Complex64::new(0.0, 0.0);
const C1: Complex64 = Complex64::new(1.0, 0.0);

/// State-preparation-and-measurement model: an ideal visibility `V` is
/// observed as `A·V + B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Spam {
    pub a: f64,
    pub b: f64,
}

impl Spam {
    /// Maps an ideal error probability through the visibility transform,
    /// using `V = 1 − 2P`.
    pub fn observe_error(&self, p_err: f64) -> f64 {
        let v = 1.0 - 2.0 * p_err;
        0.5 * (1.0 - (self.a * v + self.b))
    }
}

/// Single-qubit density matrix in the `{|0⟩, |1⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitState {
    rho: Matrix2<Complex64>,
}

impl QubitState {
    pub fn ground() -> Self {
        Self { rho: Matrix2::new(C1, C0, C0, C0) }
    }

    pub fn excited() -> Self {
        Self { rho: Matrix2::new(C0, C0, C0, C1) }
    }

    pub fn maximally_mixed() -> Self {
        Self { rho: Matrix2::identity() * Complex64::new(0.5, 0.0) }
    }

    /// `(I + x X + y Y + z Z)/2`.
    pub fn from_bloch(x: f64, y: f64, z: f64) -> Self {
        let h = 0.5;
        Self {
            rho: Matrix2::new(
                Complex64::new(h * (1.0 + z), 0.0),
                Complex64::new(h * x, -h * y),
                Complex64::new(h * x, h * y),
                Complex64::new(h * (1.0 - z), 0.0),
            ),
        }
    }

    pub fn from_matrix(rho: Matrix2<Complex64>) -> Result<Self> {
        let s = Self { rho };
        if !s.is_valid(1e-10) {
            return Err(Error::domain("matrix is not a density matrix"));
        }
        Ok(s)
    }

    pub fn matrix(&self) -> &Matrix2<Complex64> {
        &self.rho
    }

    pub fn bloch(&self) -> [f64; 3] {
        [2.0 * self.rho[(1, 0)].re, 2.0 * self.rho[(1, 0)].im, (self.rho[(0, 0)] - self.rho[(1, 1)]).re]
    }

    pub fn population(&self, level: usize) -> f64 {
        self.rho[(level, level)].re
    }

    /// Hermitian, unit trace and positive semidefinite within `tol`.
    pub fn is_valid(&self, tol: f64) -> bool {
        let herm = (self.rho - self.rho.adjoint()).norm() <= tol;
        let trace = (self.rho.trace() - C1).norm() <= tol;
        let [x, y, z] = self.bloch();
        let r = (x * x + y * y + z * z).sqrt();
        herm && trace && r <= 1.0 + tol
    }
}

pub fn apply_unitary(state: &QubitState, u: &Unitary2) -> QubitState {
    QubitState { rho: u * state.rho * u.adjoint() }
}

/// `ρ → UρU†` for the Clifford's unitary.
pub fn apply_clifford(state: &QubitState, c: &CliffordOp) -> QubitState {
    apply_unitary(state, &c.unitary)
}

/// Rotation `exp(−iφZ/2)`; populations are unchanged.
pub fn apply_z_phase(state: &QubitState, phi: f64) -> QubitState {
    let mut rho = state.rho;
    let f = Complex64::from_polar(1.0, -phi);
    rho[(0, 1)] *= f;
    rho[(1, 0)] *= f.conj();
    QubitState { rho }
}

/// Amplitude damping toward `|0⟩` with `γ = 1 − e^{−dt/T₁}`.
pub fn apply_amplitude_damping(state: &QubitState, dt: f64, t1: f64) -> QubitState {
    if dt <= 0.0 {
        return *state;
    }
    let keep = (-dt / t1).exp();
    let mut rho = state.rho;
    let p1 = rho[(1, 1)].re * keep;
    rho[(1, 1)] = Complex64::new(p1, 0.0);
    rho[(0, 0)] = Complex64::new(1.0 - p1, 0.0);
    let c = keep.sqrt();
    rho[(0, 1)] *= c;
    rho[(1, 0)] *= c;
    QubitState { rho }
}

/// `1 − ⟨target|ρ|target⟩`, optionally mapped through SPAM.
pub fn measure_error(state: &QubitState, target: usize, spam: Option<Spam>) -> f64 {
    let p = (1.0 - state.population(target)).clamp(0.0, 1.0);
    match spam {
        Some(s) => s.observe_error(p),
        None => p,
    }
}

/// Two-qubit density matrix, basis index `2a + b` for qubits (A, B).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitState {
    rho: Matrix4<Complex64>,
}

fn kron(a: &Unitary2, b: &Unitary2) -> Matrix4<Complex64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

impl TwoQubitState {
    pub fn ground() -> Self {
        let mut rho = Matrix4::zeros();
        rho[(0, 0)] = C1;
        Self { rho }
    }

    pub fn product(a: &QubitState, b: &QubitState) -> Self {
        Self { rho: kron(a.matrix(), b.matrix()) }
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    /// Applies `U_A ⊗ U_B`.
    pub fn apply_local(&self, ua: &Unitary2, ub: &Unitary2) -> Self {
        let u = kron(ua, ub);
        Self { rho: u * self.rho * u.adjoint() }
    }

    /// Reduced state of qubit `q` (0 = A, 1 = B).
    pub fn reduced(&self, q: usize) -> QubitState {
        let mut r = Matrix2::zeros();
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    let (a, b) = if q == 0 { (2 * i + k, 2 * j + k) } else { (2 * k + i, 2 * k + j) };
                    r[(i, j)] += self.rho[(a, b)];
                }
            }
        }
        QubitState { rho: r }
    }

    pub fn is_valid(&self, tol: f64) -> bool {
        let herm = (self.rho - self.rho.adjoint()).norm() <= tol;
        let trace = (self.rho.trace() - C1).norm() <= tol;
        let eig = self.rho.symmetric_eigenvalues();
        herm && trace && eig.iter().all(|&e| e >= -tol)
    }
}

/// Evolution under the centred ZZ Hamiltonian `(Ω_ZZ/4) Z⊗Z` for `dt`: `|11⟩`
/// gains `Ω_ZZ·dt` relative to the single-excitation phases, and each qubit
/// sees a `±Ω_ZZ/2` shift conditional on the other.
pub fn evolve_zz(state: &TwoQubitState, omega_zz: f64, dt: f64) -> TwoQubitState {
    let theta = omega_zz * dt / 4.0;
    let signs = [1.0, -1.0, -1.0, 1.0];
    let phase: Vec<Complex64> = signs.iter().map(|s| Complex64::from_polar(1.0, -s * theta)).collect();
    let mut rho = state.rho;
    for r in 0..4 {
        for c in 0..4 {
            rho[(r, c)] *= phase[r] * phase[c].conj();
        }
    }
    TwoQubitState { rho }
}

/// Error probability of one qubit of a two-qubit state.
pub fn measure_error_two(state: &TwoQubitState, qubit: usize, target: usize, spam: Option<Spam>) -> f64 {
    measure_error(&state.reduced(qubit), target, spam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubit_sim::clifford::{clifford_table, rotation, PhysicalGate};

    #[test]
    fn x_pi_flips() {
        let s = apply_unitary(&QubitState::ground(), &PhysicalGate::X180.unitary());
        assert!((s.population(1) - 1.0).abs() < 1e-12);
        let id = clifford_table().get(0);
        assert_eq!(apply_clifford(&s, id), s);
    }

    #[test]
    fn z_phase_composes_and_keeps_populations() {
        let s = QubitState::from_bloch(0.6, 0.0, 0.8);
        let a = apply_z_phase(&apply_z_phase(&s, 0.3), 0.5);
        let b = apply_z_phase(&s, 0.8);
        assert!((a.matrix() - b.matrix()).norm() < 1e-14);
        assert_eq!(apply_z_phase(&s, 0.0), s);
        assert!((a.population(0) - s.population(0)).abs() < 1e-15);
        // matches the unitary form
        let c = apply_unitary(&s, &rotation('z', 0.8));
        assert!((c.matrix() - b.matrix()).norm() < 1e-14);
    }

    #[test]
    fn damping() {
        let s = apply_amplitude_damping(&QubitState::excited(), 1e-6, 26.7e-6);
        assert!((s.population(1) - (-1e-6 / 26.7e-6f64).exp()).abs() < 1e-15);
        let g = QubitState::from_bloch(1.0, 0.0, 0.0);
        assert_eq!(apply_amplitude_damping(&g, 0.0, 1e-6), g);
        let p = apply_amplitude_damping(&QubitState::excited(), 26.7e-6, 26.7e-6);
        assert!((p.population(1) - (-1.0f64).exp()).abs() < 1e-15);
        assert!(p.is_valid(1e-12));
    }

    #[test]
    fn measurement() {
        assert_eq!(measure_error(&QubitState::ground(), 0, None), 0.0);
        assert_eq!(measure_error(&QubitState::excited(), 0, None), 1.0);
        assert!((measure_error(&QubitState::maximally_mixed(), 0, None) - 0.5).abs() < 1e-15);
        let spam = Spam { a: 1.0, b: 0.0 };
        assert!((measure_error(&QubitState::maximally_mixed(), 0, Some(spam)) - 0.5).abs() < 1e-15);
        let spam = Spam { a: 0.88, b: 0.015 };
        assert!((spam.observe_error(0.0) - 0.5 * (1.0 - 0.895)).abs() < 1e-15);
    }

    #[test]
    fn zz_conditional_phase() {
        let omega = 2.0 * std::f64::consts::PI * 0.4e6;
        let dt = 100e-9;
        let plus = QubitState::from_bloch(1.0, 0.0, 0.0);
        let phase_of_a = |b: QubitState| {
            let s = evolve_zz(&TwoQubitState::product(&plus, &b), omega, dt);
            let [x, y, _] = s.reduced(0).bloch();
            y.atan2(x)
        };
        let d = phase_of_a(QubitState::ground()) - phase_of_a(QubitState::excited());
        assert!((d.abs() - omega * dt).abs() < 1e-12);
        // Ω = 0 leaves a product state unchanged
        let s = TwoQubitState::product(&plus, &QubitState::from_bloch(0.0, 1.0, 0.0));
        assert_eq!(evolve_zz(&s, 0.0, dt), s);
        assert!(evolve_zz(&s, omega, dt).is_valid(1e-12));
    }
}
