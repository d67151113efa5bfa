//! Experiment drivers: RB reference and interleaved RB, RB Ramsey and RB echo
//! idle scans, Ramsey, spin echo and T₁ decays, simultaneous two-qubit RB
//! with ZZ coupling, and repeated-frequency-measurement flux spectroscopy.
//!
//! Every trial draws from its own stream derived from `(seed, tag, point,
//! length, sequence)` and trials are reduced in index order, so results do not
//! depend on the thread count.

mod coherence;
mod config;
mod curve;
mod engine;
mod precision;
mod rb;
mod rto;
mod simultaneous;

pub use coherence::{run_ramsey, run_spin_echo, run_t1};
pub use config::{geometric_lengths, m_max_for_error, MGrid, OffsetMode, ProtocolConfig};
pub use curve::{fmt_f64, CurveKind, DecayCurve, PsdEstimate};
pub use precision::{compare_precision, PrecisionComparison};
pub use rb::{
    analyze_interleaved, extract_interleaved_error, fit_decay, fit_decay_with, interleaved_error_se, rb_echo,
    rb_ramsey, run_idle_scan, run_interleaved_rb, run_rb_reference, subtract_t1, DecayFit, DecayOffsets, IdleScan,
    InterleavedPoint,
};
pub use rto::{power_law_trace, run_rto, welch_psd, RtoConfig};
pub use simultaneous::{
    fit_zz_quadratic, run_simultaneous_rb, SimultaneousPoint, SimultaneousRb, ZzQuadraticFit,
    PHYSICAL_GATES_PER_CLIFFORD,
};
