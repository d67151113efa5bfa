#![allow(dead_code)]

/// Mean and standard error of a sample.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

use rbnoise::noise_gen::NoiseSpec;
use rbnoise::noise_models::{rb_error_from_variance, Filter};
use rbnoise::protocols::{geometric_lengths, m_max_for_error, MGrid, ProtocolConfig};

/// Idle-scan config whose lengths per τ keep the total expected sequence error
/// near `target`; `points` lengths per τ.
pub fn idle_scan_config(
    noise: NoiseSpec,
    taus: &[f64],
    n_sequences: usize,
    target: f64,
    filter: Filter,
    seed: u64,
) -> (ProtocolConfig, Vec<f64>) {
    let p = noise.model_params();
    let expected: Vec<f64> = taus.iter().map(|&t| rb_error_from_variance(&p, t, filter).unwrap()).collect();
    let lengths = expected.iter().map(|&r| geometric_lengths(m_max_for_error(r, target, 4, 400), 5)).collect();
    let cfg = ProtocolConfig {
        m_grid: MGrid::PerTau { lengths },
        n_sequences,
        tau_values: taus.to_vec(),
        noise,
        seed,
        ..Default::default()
    };
    (cfg, expected)
}
