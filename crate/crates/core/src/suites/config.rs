use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::Experiment;
use crate::fitting::{PhaseRelation, Terms};
use crate::noise_gen::NoiseSpec;
use crate::noise_models::ONE_OVER_F_MAX_FC_TAU;
use crate::protocols::{ProtocolConfig, RtoConfig};

/// Seed used when neither the file nor the command line sets one, so that
/// every run is reproducible.
pub const DEFAULT_SEED: u64 = 1;

fn default_seed() -> u64 {
    DEFAULT_SEED
}

/// Protocol driven by the `custom` suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CustomProtocol {
    Reference,
    RbRamsey,
    RbEcho,
    Ramsey,
    SpinEcho,
    T1,
    Simultaneous,
}

impl CustomProtocol {
    pub fn name(self) -> &'static str {
        match self {
            CustomProtocol::Reference => "reference",
            CustomProtocol::RbRamsey => "rb_ramsey",
            CustomProtocol::RbEcho => "rb_echo",
            CustomProtocol::Ramsey => "ramsey",
            CustomProtocol::SpinEcho => "spin_echo",
            CustomProtocol::T1 => "t1",
            CustomProtocol::Simultaneous => "simultaneous",
        }
    }

    /// Uses the Ramsey filter, where the logarithmic 1/f form needs `f_c·τ ≪ 1`.
    fn ramsey_filtered(self) -> bool {
        matches!(self, CustomProtocol::RbRamsey | CustomProtocol::Ramsey)
    }
}

/// Settings of the `custom` suite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSettings {
    pub protocol: CustomProtocol,
    /// Dephasing terms fitted to RB Ramsey/echo idle errors (T₁ held at `noise.t1`).
    #[serde(default)]
    pub fit: Option<Terms>,
    /// Idle-error relation used by that fit.
    #[serde(default)]
    pub relation: PhaseRelation,
    /// ZZ coupling Ω_ZZ/2π (Hz) for the simultaneous protocol.
    #[serde(default)]
    pub omega_zz_hz: Option<f64>,
}

/// Contents of a run configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory; the command line may override it.
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Raise trial counts tenfold.
    #[serde(default)]
    pub paper_scale: bool,
    /// Injected noise for `fig1_comparison`, `fig2_telegraph` and `custom`.
    #[serde(default)]
    pub noise: Option<NoiseSpec>,
    /// Protocol settings of the `custom` suite.
    #[serde(default)]
    pub protocol: Option<ProtocolConfig>,
    #[serde(default)]
    pub custom: Option<CustomSettings>,
    /// Overrides of the `appD_rto` spectroscopy settings.
    #[serde(default)]
    pub rto: Option<RtoConfig>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            seed: DEFAULT_SEED,
            out: None,
            paper_scale: false,
            noise: None,
            protocol: None,
            custom: None,
            rto: None,
        }
    }

    /// Parses TOML; syntax and schema errors carry the offending line.
    pub fn from_toml(text: &str) -> std::result::Result<Self, Vec<Diagnostic>> {
        toml::from_str(text).map_err(|e| {
            let line = e.span().map(|s| line_of_offset(text, s.start));
            vec![Diagnostic { severity: Severity::Error, line, message: e.message().trim().to_string() }]
        })
    }

    /// Noise the suite injects, after the file's override.
    pub fn effective_noise(&self) -> Option<NoiseSpec> {
        match self.experiment {
            Experiment::Custom => self.noise.or(self.protocol.as_ref().map(|p| p.noise)),
            Experiment::Fig1Comparison | Experiment::Fig2Telegraph => {
                Some(self.noise.unwrap_or_else(|| super::runs::default_noise(self.experiment)))
            }
            _ => None,
        }
    }

    /// Schema and physics checks. Messages start with the dotted field path.
    pub fn diagnostics(&self) -> Vec<Diagnostic> {
        let mut d = Vec::new();
        let err = |m: String| Diagnostic { severity: Severity::Error, line: None, message: m };
        let warn = |m: String| Diagnostic { severity: Severity::Warning, line: None, message: m };
        let custom = self.experiment == Experiment::Custom;
        let takes_noise = matches!(self.experiment, Experiment::Fig1Comparison | Experiment::Fig2Telegraph) || custom;
        if self.noise.is_some() && !takes_noise {
            d.push(warn(format!("noise is ignored by {}, which injects its fixture noise", self.experiment.name())));
        }
        if let Some(n) = &self.noise {
            if let Err(crate::Error::Config(p)) = n.validate() {
                d.extend(p.into_iter().map(err));
            }
        }
        if !custom && (self.protocol.is_some() || self.custom.is_some()) {
            d.push(warn(format!("protocol and custom tables are only read by the custom suite, not {}", self.experiment.name())));
        }
        if self.rto.is_some() && self.experiment != Experiment::AppDRto {
            d.push(warn("rto is only read by appD_rto".into()));
        }
        if let Some(r) = &self.rto {
            d.extend(r.diagnostics().into_iter().map(err));
        }
        let mut tau_max = super::runs::ramsey_tau_max(self.experiment);
        if custom {
            match (&self.protocol, &self.custom) {
                (Some(p), Some(c)) => {
                    let overridden = self.noise.is_some();
                    for m in p.diagnostics() {
                        if overridden && m.starts_with("noise.") {
                            continue;
                        }
                        let m = if m.starts_with("noise.") { format!("protocol.{m}") } else { m };
                        d.push(err(m));
                    }
                    if p.tau_values.is_empty() && c.protocol != CustomProtocol::Reference {
                        d.push(err(format!("protocol.tau_values must not be empty for {}", c.protocol.name())));
                    }
                    if c.protocol == CustomProtocol::Simultaneous {
                        match c.omega_zz_hz {
                            Some(w) if w.is_finite() => {}
                            _ => d.push(err("custom.omega_zz_hz is required (finite) for the simultaneous protocol".into())),
                        }
                    }
                    if c.fit.is_some() && !matches!(c.protocol, CustomProtocol::RbRamsey | CustomProtocol::RbEcho) {
                        d.push(warn("custom.fit only applies to rb_ramsey and rb_echo".into()));
                    }
                    if c.fit == Some(Terms::default()) {
                        d.push(err("custom.fit selects no dephasing term".into()));
                    }
                    if c.protocol.ramsey_filtered() {
                        tau_max = p.tau_values.iter().cloned().fold(None, |a: Option<f64>, t| Some(a.map_or(t, |a| a.max(t))));
                    }
                }
                (None, _) => d.push(err("protocol table is required for the custom suite".into())),
                (_, None) => d.push(err("custom table is required for the custom suite".into())),
            }
        }
        if let (Some(noise), Some(tau_max)) = (self.effective_noise(), tau_max) {
            if let Some(o) = noise.one_over_f {
                let x = o.f_c * tau_max;
                if x > ONE_OVER_F_MAX_FC_TAU {
                    let path = if self.noise.is_some() { "noise" } else { "protocol.noise" };
                    d.push(err(format!(
                        "{path}.one_over_f.f_c: f_c·τ_max = {x:.3} exceeds {ONE_OVER_F_MAX_FC_TAU}; the logarithmic 1/f Ramsey phase variance \
                         ⟨φ²⟩ ∝ τ²·ln(0.40/(f_c·τ)) only holds for f_c·τ ≪ 1 (f_c·τ ≤ {ONE_OVER_F_MAX_FC_TAU})"
                    )));
                }
            }
        }
        d
    }

    /// Diagnostics with line numbers resolved against the file text.
    pub fn diagnostics_in(&self, text: &str) -> Vec<Diagnostic> {
        let mut d = self.diagnostics();
        for x in &mut d {
            x.line = locate(text, field_path(&x.message));
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    /// 1-based line in the configuration file, when known.
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match self.line {
            Some(l) => write!(f, "line {l}: {sev}: {}", self.message),
            None => write!(f, "{sev}: {}", self.message),
        }
    }
}

pub fn has_errors(d: &[Diagnostic]) -> bool {
    d.iter().any(|x| x.severity == Severity::Error)
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Leading dotted path of a diagnostic message, without index brackets.
fn field_path(message: &str) -> String {
    let token = message.split_whitespace().next().unwrap_or("");
    let token = token.trim_end_matches([':', ',']);
    let mut out = String::new();
    let mut depth = 0;
    for c in token.chars() {
        match c {
            '[' => depth += 1,
            ']' => depth -= 1,
            _ if depth == 0 => out.push(c),
            _ => {}
        }
    }
    out
}

/// Line of the key or table header whose dotted path shares the longest
/// prefix with `path`.
fn locate(text: &str, path: String) -> Option<usize> {
    let want: Vec<&str> = path.split('.').filter(|s| !s.is_empty()).collect();
    if want.is_empty() {
        return None;
    }
    let mut table: Vec<String> = Vec::new();
    let mut best: Option<(usize, usize)> = None;
    let mut consider = |full: Vec<String>, line: usize| {
        let n = full.iter().zip(&want).take_while(|(a, b)| a.as_str() == **b).count();
        if n == full.len() && n > 0 && best.is_none_or(|(m, _)| n > m) {
            best = Some((n, line));
        }
    };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(h) = line.strip_prefix('[') {
            let h = h.trim_start_matches('[').trim_end_matches(']').trim_end_matches(']');
            table = h.split('.').map(|s| s.trim().to_string()).collect();
            consider(table.clone(), i + 1);
        } else if let Some((k, _)) = line.split_once('=') {
            let mut full = table.clone();
            full.extend(k.split('.').map(|s| s.trim().trim_matches('"').to_string()));
            consider(full, i + 1);
        }
    }
    best.map(|(_, l)| l)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn paths_and_lines() {
        assert_eq!(field_path("protocol.tau_values[2] must be finite"), "protocol.tau_values");
        let text = "experiment = \"custom\"\n[protocol]\nn_sequences = 0\n[protocol.noise]\nt1 = -1\n";
        assert_eq!(locate(text, "protocol.noise.t1".into()), Some(5));
        assert_eq!(locate(text, "protocol.n_sequences".into()), Some(3));
        assert_eq!(locate(text, "protocol.noise.t_phi1".into()), Some(4));
        assert_eq!(locate(text, "rto.s_star".into()), None);
    }
}
