//! Simulation and analysis toolkit for randomized-benchmarking measurements of
//! qubit idle errors under realistic dephasing noise.
//!
//! * [`noise_models`]: closed-form phase variances, spectra and device formulas.
//! * [`noise_gen`]: seeded time-domain noise traces.
//! * [`qubit_sim`]: single-Clifford group and density-matrix evolution.
//! * [`protocols`]: RB, interleaved RB, Ramsey, echo, T₁ and readout-phase protocols.
//! * [`fitting`]: least-squares fits and error budgets.
//! * [`suites`]: configuration, experiment suites and run manifests.

pub mod error;
pub mod fitting;
pub mod noise_gen;
pub mod noise_models;
pub mod protocols;
pub mod qubit_sim;
pub mod suites;

pub use error::{Error, Result};
