use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::FitData;

/// What a curve's y column holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// Mean sequence survival probability vs sequence length m.
    RbFidelity,
    /// Ramsey/echo visibility vs idle time (s).
    Visibility,
    /// Error per gate vs idle time (s) or gate duration (s).
    IdleError,
    /// Excited-state population vs wait time (s).
    P1Decay,
}

impl CurveKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveKind::RbFidelity => "rb_fidelity",
            CurveKind::Visibility => "visibility",
            CurveKind::IdleError => "idle_error",
            CurveKind::P1Decay => "p1_decay",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "rb_fidelity" => CurveKind::RbFidelity,
            "visibility" => CurveKind::Visibility,
            "idle_error" => CurveKind::IdleError,
            "p1_decay" => CurveKind::P1Decay,
            other => return Err(Error::Parse(format!("unknown curve kind '{other}'"))),
        })
    }
}

/// Averaged measurement curve. `x` is strictly increasing, `yerr` is the
/// standard error of each mean, `n_trials` the trials behind every point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub yerr: Vec<f64>,
    pub n_trials: usize,
    pub kind: CurveKind,
}

/// Formats a float with 17 significant digits (round-trips exactly).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl DecayCurve {
    pub fn new(x: Vec<f64>, y: Vec<f64>, yerr: Vec<f64>, n_trials: usize, kind: CurveKind) -> Result<Self> {
        if x.len() != y.len() || x.len() != yerr.len() {
            return Err(Error::domain("curve columns must have equal lengths"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::domain("curve x values must be strictly increasing"));
        }
        if yerr.iter().any(|e| !(*e >= 0.0)) {
            return Err(Error::domain("curve yerr must be >= 0"));
        }
        if n_trials == 0 {
            return Err(Error::domain("curve n_trials must be >= 1"));
        }
        Ok(Self { x, y, yerr, n_trials, kind })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Fit input weighted by `yerr`; points with zero error fall back to an
    /// unweighted fit when every error is zero, otherwise to the smallest
    /// non-zero error.
    pub fn to_fit_data(&self) -> Result<FitData> {
        let positive = self.yerr.iter().cloned().filter(|&e| e > 0.0).fold(f64::INFINITY, f64::min);
        let sigma = positive
            .is_finite()
            .then(|| self.yerr.iter().map(|&e| if e > 0.0 { e } else { positive }).collect());
        FitData::new(self.x.clone(), self.y.clone(), sigma)
    }

    /// CSV with a `# kind: …` comment line and header `x,y,yerr,n`.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# kind: {}\nx,y,yerr,n\n", self.kind.as_str());
        for i in 0..self.len() {
            let _ = writeln!(s, "{},{},{},{}", fmt_f64(self.x[i]), fmt_f64(self.y[i]), fmt_f64(self.yerr[i]), self.n_trials);
        }
        s
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut kind = None;
        let (mut x, mut y, mut yerr) = (Vec::new(), Vec::new(), Vec::new());
        let mut n_trials = None;
        let mut header = false;
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(k) = rest.trim().strip_prefix("kind:") {
                    kind = Some(CurveKind::parse(k.trim())?);
                }
                continue;
            }
            if !header {
                if line != "x,y,yerr,n" {
                    return Err(Error::Parse(format!("line {}: expected header 'x,y,yerr,n'", lineno + 1)));
                }
                header = true;
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("line {}: expected 4 columns", lineno + 1)));
            }
            let num = |s: &str| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))
            };
            x.push(num(cols[0])?);
            y.push(num(cols[1])?);
            yerr.push(num(cols[2])?);
            let n: usize = cols[3].trim().parse().map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if n_trials.is_some_and(|m| m != n) {
                return Err(Error::Parse(format!("line {}: inconsistent n", lineno + 1)));
            }
            n_trials = Some(n);
        }
        let kind = kind.ok_or_else(|| Error::Parse("missing '# kind:' line".into()))?;
        Self::new(x, y, yerr, n_trials.unwrap_or(1), kind)
    }
}

/// One-sided power spectral density estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsdEstimate {
    /// Frequencies (Hz), strictly increasing, in `(0, f_n]`.
    pub freqs: Vec<f64>,
    /// Density in (unit)²/Hz.
    pub values: Vec<f64>,
    /// Segments averaged per bin.
    pub segments: usize,
    /// Nyquist frequency (Hz).
    pub f_n: f64,
}

impl PsdEstimate {
    /// CSV with header `f_hz,psd` and a comment line holding `segments` and `f_n`.
    pub fn to_csv(&self) -> String {
        let mut s = format!("# segments: {} f_n: {}\nf_hz,psd\n", self.segments, fmt_f64(self.f_n));
        for (f, v) in self.freqs.iter().zip(&self.values) {
            let _ = writeln!(s, "{},{}", fmt_f64(*f), fmt_f64(*v));
        }
        s
    }
}
