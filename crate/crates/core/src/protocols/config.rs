use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::noise_gen::NoiseSpec;
use crate::qubit_sim::Spam;

/// How sequence lengths are chosen for each idle duration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum MGrid {
    /// The same lengths for every τ.
    Explicit { lengths: Vec<usize> },
    /// One list of lengths per τ, in the order of `tau_values`.
    PerTau { lengths: Vec<Vec<usize>> },
    /// Longest sequence falls geometrically from `m_max_short` at the shortest
    /// τ to `m_max_long` at the longest; `points` lengths from 1 up to it.
    Scaled { m_max_short: usize, m_max_long: usize, points: usize },
}

impl Default for MGrid {
    fn default() -> Self {
        MGrid::Scaled { m_max_short: 300, m_max_long: 21, points: 8 }
    }
}

/// `points` distinct lengths spread roughly geometrically over `[1, m_max]`.
pub fn geometric_lengths(m_max: usize, points: usize) -> Vec<usize> {
    let m_max = m_max.max(1);
    let points = points.max(1);
    let mut v: Vec<usize> = (0..points)
        .map(|i| {
            let f = if points == 1 { 1.0 } else { i as f64 / (points - 1) as f64 };
            (m_max as f64).powf(f).round() as usize
        })
        .collect();
    v.push(m_max);
    v.sort_unstable();
    v.dedup();
    v
}

/// Longest sequence such that the expected total error `m·r` stays near
/// `target` (the regime where the decay is close to exponential), clamped to
/// `[m_min, m_cap]`.
pub fn m_max_for_error(r_expected: f64, target: f64, m_min: usize, m_cap: usize) -> usize {
    if !(r_expected > 0.0) {
        return m_cap;
    }
    ((target / r_expected).round() as usize).clamp(m_min, m_cap)
}

/// Treatment of `A`, `B` in `F(m) = A·p^m + B`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OffsetMode {
    /// Both fixed by the readout model. Exact when the recovery Clifford is
    /// instantaneous and noiseless.
    #[default]
    Known,
    /// `B` fixed, `A` fitted; absorbs error spent in timed recovery gates.
    FreeA,
    Free,
}

/// Settings shared by the single-qubit experiment drivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProtocolConfig {
    #[serde(default)]
    pub m_grid: MGrid,
    /// Random sequences (or noise realizations) per point; each draws its own noise.
    #[serde(default = "default_n_sequences")]
    pub n_sequences: usize,
    /// Idle durations (s).
    #[serde(default)]
    pub tau_values: Vec<f64>,
    #[serde(default)]
    pub noise: NoiseSpec,
    #[serde(default)]
    pub seed: u64,
    /// SPAM applied to every readout; `None` is ideal readout.
    #[serde(default)]
    pub spam: Option<Spam>,
    /// Duration of one physical pulse slot inside a Clifford (s); 0 makes
    /// Cliffords instantaneous so that the reference decay is noise free.
    #[serde(default)]
    pub clifford_slot_time: f64,
    /// Projective shots per sequence; `None` records exact probabilities.
    #[serde(default)]
    pub shots: Option<u64>,
    /// Which RB offsets are fitted.
    #[serde(default)]
    pub offsets: OffsetMode,
}

fn default_n_sequences() -> usize {
    30
}

impl Default for ProtocolConfig {
    fn default() -> Self {
        Self {
            m_grid: MGrid::default(),
            n_sequences: default_n_sequences(),
            tau_values: Vec::new(),
            noise: NoiseSpec::default(),
            seed: 0,
            spam: None,
            clifford_slot_time: 0.0,
            shots: None,
            offsets: OffsetMode::Known,
        }
    }
}

impl ProtocolConfig {
    /// Collects every problem as `field: message`.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut d = Vec::new();
        if self.n_sequences == 0 {
            d.push("protocol.n_sequences must be >= 1".into());
        }
        for (i, t) in self.tau_values.iter().enumerate() {
            if !(t.is_finite() && *t >= 0.0) {
                d.push(format!("protocol.tau_values[{i}] must be finite and >= 0, got {t}"));
            }
        }
        if self.tau_values.windows(2).any(|w| !(w[1] > w[0])) {
            d.push("protocol.tau_values must be strictly increasing".into());
        }
        if !(self.clifford_slot_time.is_finite() && self.clifford_slot_time >= 0.0) {
            d.push(format!("protocol.clifford_slot_time must be >= 0, got {}", self.clifford_slot_time));
        }
        if self.shots == Some(0) {
            d.push("protocol.shots must be >= 1 when given".into());
        }
        match &self.m_grid {
            MGrid::Explicit { lengths } => {
                if lengths.is_empty() || lengths.contains(&0) {
                    d.push("protocol.m_grid.lengths must be non-empty and >= 1".into());
                }
            }
            MGrid::PerTau { lengths } => {
                if lengths.len() != self.tau_values.len() {
                    d.push("protocol.m_grid.lengths needs one list per tau value".into());
                }
                if lengths.iter().any(|l| l.is_empty() || l.contains(&0)) {
                    d.push("protocol.m_grid.lengths entries must be non-empty and >= 1".into());
                }
            }
            MGrid::Scaled { m_max_short, m_max_long, points } => {
                if *m_max_short == 0 || *m_max_long == 0 || *points == 0 {
                    d.push("protocol.m_grid scaled values must be >= 1".into());
                }
            }
        }
        if let Err(Error::Config(p)) = self.noise.validate() {
            d.extend(p);
        }
        d
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.diagnostics();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(d))
        }
    }

    /// Sequence lengths used at `tau_values[index]` (or the shortest-τ grid when
    /// there are no idles, as for the reference alone).
    pub fn lengths_for(&self, index: usize) -> Vec<usize> {
        match &self.m_grid {
            MGrid::Explicit { lengths } => sorted(lengths.clone()),
            MGrid::PerTau { lengths } => sorted(lengths.get(index).cloned().unwrap_or_default()),
            MGrid::Scaled { m_max_short, m_max_long, points } => {
                let taus: Vec<f64> = self.tau_values.iter().cloned().filter(|t| *t > 0.0).collect();
                let m_max = match (taus.first(), taus.last(), self.tau_values.get(index)) {
                    (Some(&lo), Some(&hi), Some(&t)) if hi > lo && t > 0.0 => {
                        let f = ((t / lo).ln() / (hi / lo).ln()).clamp(0.0, 1.0);
                        (*m_max_short as f64 * (*m_max_long as f64 / *m_max_short as f64).powf(f)).round() as usize
                    }
                    _ => *m_max_short,
                };
                geometric_lengths(m_max, *points)
            }
        }
    }

    /// RB offsets `(A, B)` in `F = A·p^m + B` implied by the readout model:
    /// `(1/2, 1/2)` for ideal readout, `(a/2, (1 + b)/2)` with SPAM.
    pub fn rb_offsets(&self) -> (f64, f64) {
        match self.spam {
            Some(s) => (0.5 * s.a, 0.5 * (1.0 + s.b)),
            None => (0.5, 0.5),
        }
    }
}

fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v.dedup();
    v
}
