mod common;

use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rbnoise::noise_gen::NoiseSpec;
use rbnoise::protocols::{
    run_interleaved_rb, run_simultaneous_rb, MGrid, OffsetMode, ProtocolConfig,
};
use rbnoise::qubit_sim::*;

fn random_state(rng: &mut impl Rng) -> QubitState {
    let (x, y, z): (f64, f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
    let n = (x * x + y * y + z * z).sqrt().max(1.0);
    let r: f64 = rng.random_range(0.0..1.0);
    QubitState::from_bloch(r * x / n, r * y / n, r * z / n)
}

#[test]
fn table_size_inverses_and_gate_count() {
    let t = clifford_table();
    assert_eq!(t.len(), 24);
    for i in 0..24 {
        let inv = t.inverse(i);
        let prod = t.get(inv).unitary * t.get(i).unitary;
        assert!(equal_up_to_phase(&prod, &Unitary2::identity(), 1e-12));
    }
    assert!((t.mean_physical_gate_count() - 1.875).abs() < 1e-15);
}

#[test]
fn inverse_of_short_sequences() {
    assert_eq!(inverse_of_sequence(&[0]).unwrap().index, 0);
    let t = clifford_table();
    for c in 0..24 {
        let inv = t.inverse(c);
        assert_eq!(inverse_of_sequence(&[c, inv]).unwrap().index, 0);
    }
}

#[test]
fn noiseless_length_100_sequence_by_matrix_product() {
    let t = clifford_table();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let seq: Vec<usize> = (0..100).map(|_| rng.random_range(0..24)).collect();
        let rec = inverse_of_sequence(&seq).unwrap();
        let mut s = QubitState::ground();
        for &c in &seq {
            s = apply_clifford(&s, t.get(c));
        }
        s = apply_clifford(&s, rec);
        assert!(measure_error(&s, 0, None) < 1e-10);
    }
}

#[test]
fn bloch_path_matches_density_matrix() {
    let t = clifford_table();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let mut rho = random_state(&mut rng);
        let mut b = BlochVector::from_state(&rho);
        for _ in 0..30 {
            let c = rng.random_range(0..24);
            rho = apply_clifford(&rho, t.get(c));
            b.rotate(&t.get(c).bloch_rotation);
            let phi: f64 = rng.random_range(-1.0..1.0);
            rho = apply_z_phase(&rho, phi);
            b.z_phase(phi);
            let dt: f64 = rng.random_range(0.0..1e-6);
            rho = apply_amplitude_damping(&rho, dt, 26.7e-6);
            b.damp(dt, 26.7e-6);
        }
        let [x, y, z] = rho.bloch();
        assert!((b.0.x - x).abs() < 1e-12 && (b.0.y - y).abs() < 1e-12 && (b.0.z - z).abs() < 1e-12);
        assert!((b.population(0) - rho.population(0)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn density_matrix_invariants_hold(seed in any::<u64>(), steps in 1usize..60) {
        let t = clifford_table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = random_state(&mut rng);
        for _ in 0..steps {
            match rng.random_range(0..3) {
                0 => s = apply_clifford(&s, t.get(rng.random_range(0..24))),
                1 => s = apply_z_phase(&s, rng.random_range(-10.0..10.0)),
                _ => s = apply_amplitude_damping(&s, rng.random_range(0.0..5e-6), 26.7e-6),
            }
            prop_assert!(s.is_valid(1e-10));
            prop_assert!((s.matrix().trace().re - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn two_qubit_invariants_hold(seed in any::<u64>(), steps in 1usize..30) {
        let t = clifford_table();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut s = TwoQubitState::product(&random_state(&mut rng), &random_state(&mut rng));
        for _ in 0..steps {
            let (a, b) = (rng.random_range(0..24), rng.random_range(0..24));
            s = s.apply_local(&t.get(a).unitary, &t.get(b).unitary);
            s = evolve_zz(&s, 2.0 * PI * 0.4e6, rng.random_range(0.0..1e-6));
            prop_assert!(s.is_valid(1e-10));
        }
    }

    #[test]
    fn noiseless_rb_recovers_exactly(seed in any::<u64>(), m in 1usize..200) {
        let cfg = ProtocolConfig {
            m_grid: MGrid::Explicit { lengths: vec![m] },
            n_sequences: 3,
            seed,
            clifford_slot_time: 20e-9,
            ..Default::default()
        };
        let (r, g) = run_interleaved_rb(&cfg, &GateEvent::EchoIdle { duration: 100e-9 }).unwrap();
        prop_assert!((1.0 - r.y[0]).abs() < 1e-10);
        prop_assert!((1.0 - g.y[0]).abs() < 1e-10);
    }
}

#[test]
fn damping_only_rb_error_is_tau_over_3t1() {
    let (tau, t1) = (40e-9, 26.7e-6);
    let cfg = ProtocolConfig {
        m_grid: MGrid::Explicit { lengths: vec![100] },
        n_sequences: 10_000,
        noise: NoiseSpec { t1: Some(t1), ..Default::default() },
        seed: 21,
        ..Default::default()
    };
    let (_, g) = run_interleaved_rb(&cfg, &GateEvent::Idle { duration: tau }).unwrap();
    // Invert F = ½ + ½(1 − 2r)^m per sequence mean.
    let m = 100.0;
    let f = g.y[0];
    let r = (1.0 - (2.0 * f - 1.0).powf(1.0 / m)) / 2.0;
    let se = g.yerr[0] * (2.0 * f - 1.0).powf(1.0 / m - 1.0) / m;
    let expected = tau / (3.0 * t1);
    assert!((r - expected).abs() < 3.0 * se, "r = {r:e} ± {se:e}, expected {expected:e}");
}

/// `N·r̂` from the decay inversion `r̂ = (1 − (1 − 2P)^{1/N})/2`, with its SE.
fn invert(p: f64, se: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let base = 1.0 - 2.0 * p;
    (nf * (1.0 - base.powf(1.0 / nf)) / 2.0, se * base.powf(1.0 / nf - 1.0))
}

/// Static phase `phi` per interleaved idle, injected as a static detuning.
fn static_phase_error(phi: f64, n: usize, seed: u64) -> (f64, f64) {
    let tau = 1e-7;
    let cfg = ProtocolConfig {
        m_grid: MGrid::Explicit { lengths: vec![n] },
        n_sequences: 4000,
        noise: NoiseSpec { static_detuning_hz: Some(phi / (2.0 * PI * tau)), ..Default::default() },
        seed,
        ..Default::default()
    };
    let (_, g) = run_interleaved_rb(&cfg, &GateEvent::Idle { duration: tau }).unwrap();
    invert(1.0 - g.y[0], g.yerr[0], n)
}

/// Same micro-model with an independent random sign `±phi` per gate.
fn random_sign_phase_error(phi: f64, n: usize, seed: u64) -> (f64, f64) {
    let t = clifford_table();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let errs: Vec<f64> = (0..4000)
        .map(|_| {
            let mut b = BlochVector::ground();
            let mut net = 0;
            for _ in 0..n {
                let c = rng.random_range(0..24);
                b.rotate(&t.get(c).bloch_rotation);
                net = t.then(net, c);
                b.z_phase(if rng.random_bool(0.5) { phi } else { -phi });
            }
            b.rotate(&t.get(t.inverse(net)).bloch_rotation);
            1.0 - b.population(0)
        })
        .collect();
    let (p, se) = common::mean_se(&errs);
    invert(p, se, n)
}

#[test]
fn static_dephasing_micro_model() {
    for (k, &phi) in [0.02f64, 0.05, 0.1].iter().enumerate() {
        for (j, &n) in [50usize, 100, 200].iter().enumerate() {
            let seed = (10 * k + j) as u64;
            let expected = n as f64 * phi * phi / 6.0;
            let (n_r, se) = static_phase_error(phi, n, seed);
            assert!((n_r - expected).abs() < 3.0 * se, "static phi {phi} N {n}: {n_r} ± {se} vs {expected}");
            // No coherent build-up or cancellation: a random sign per gate gives the same error.
            let (n_r2, se2) = random_sign_phase_error(phi, n, seed + 100);
            assert!((n_r2 - expected).abs() < 3.0 * se2, "random phi {phi} N {n}: {n_r2} ± {se2} vs {expected}");
            assert!((n_r - n_r2).abs() < 3.0 * se.hypot(se2));
        }
    }
}

#[test]
fn simultaneous_rb_zz_excess() {
    let omega = 2.0 * PI * 0.4e6;
    let cfg = ProtocolConfig {
        m_grid: MGrid::Explicit { lengths: vec![1, 3, 6, 12, 20] },
        n_sequences: 1500,
        tau_values: vec![100e-9],
        offsets: OffsetMode::FreeA,
        seed: 8,
        ..Default::default()
    };
    let zero = run_simultaneous_rb(&cfg, 0.0).unwrap();
    assert!(zero.points[0].excess.abs() < 1e-12);
    let s = run_simultaneous_rb(&cfg, omega).unwrap();
    let p = &s.points[0];
    let x: f64 = omega * 100e-9 / (2.0 * PI);
    let expected = PI * PI / 6.0 * x * x;
    assert!((p.excess - expected).abs() < 3.0 * p.excess_err, "{} ± {} vs {expected}", p.excess, p.excess_err);
    let s2 = run_simultaneous_rb(&cfg, 2.0 * omega).unwrap();
    let ratio = s2.points[0].excess / p.excess;
    let ratio_se = ratio * ((s2.points[0].excess_err / s2.points[0].excess).powi(2) + (p.excess_err / p.excess).powi(2)).sqrt();
    assert!((ratio - 4.0).abs() < 3.0 * ratio_se, "doubling ratio {ratio} ± {ratio_se}");
}
