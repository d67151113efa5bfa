//! Run configuration, the named experiment suites and run manifests.
//!
//! A suite turns one [`ExperimentConfig`] into a set of output files (curve
//! CSVs, fit reports, plot data). Outputs depend only on the configuration,
//! the seed and the crate version, so reruns are byte-identical.

mod config;
mod output;
mod runs;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use config::{has_errors, CustomProtocol, CustomSettings, Diagnostic, ExperimentConfig, Severity, DEFAULT_SEED};
pub use output::{sha256_hex, Outputs, RunManifest, MANIFEST_FILE};
pub use runs::{
    app_f_spectrum, app_h_devices, fig3_zz, fig4_gates, gate_event, gate_row_noise, idle_scan_plan, rows_csv, run,
    sub_seed, zz_gate_times, zz_plan, DeviceRow, OperatingPoint, ParamCheck, RowRoundTrip, Scale, SuiteRun, DEVICES,
    FLUX_F_C, FLUX_S_STAR, GATE_DURATIONS_NS, GATE_TABLE, GATE_TARGET, M_CAP, OPERATING_POINTS, T1_REFERENCE,
    TELEGRAPH_TARGET, TELEGRAPH_TAUS_NS, ZZ_MEASURED_COEFFICIENT, ZZ_OMEGA,
};

/// Named experiment suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Experiment {
    #[serde(rename = "fig1_comparison")]
    Fig1Comparison,
    #[serde(rename = "fig2_telegraph")]
    Fig2Telegraph,
    #[serde(rename = "fig3_zz")]
    Fig3Zz,
    #[serde(rename = "fig4_gates")]
    Fig4Gates,
    #[serde(rename = "appF_spectrum")]
    AppFSpectrum,
    #[serde(rename = "appD_rto")]
    AppDRto,
    #[serde(rename = "appH_devices")]
    AppHDevices,
    #[serde(rename = "custom")]
    Custom,
}

impl Experiment {
    /// Every suite, in listing order.
    pub const ALL: [Experiment; 8] = [
        Experiment::Fig1Comparison,
        Experiment::Fig2Telegraph,
        Experiment::Fig3Zz,
        Experiment::Fig4Gates,
        Experiment::AppFSpectrum,
        Experiment::AppDRto,
        Experiment::AppHDevices,
        Experiment::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Fig1Comparison => "fig1_comparison",
            Experiment::Fig2Telegraph => "fig2_telegraph",
            Experiment::Fig3Zz => "fig3_zz",
            Experiment::Fig4Gates => "fig4_gates",
            Experiment::AppFSpectrum => "appF_spectrum",
            Experiment::AppDRto => "appD_rto",
            Experiment::AppHDevices => "appH_devices",
            Experiment::Custom => "custom",
        }
    }

    /// Figure (and fit table) the suite reproduces.
    pub fn figure(self) -> &'static str {
        match self {
            Experiment::Fig1Comparison => "Fig. 1",
            Experiment::Fig2Telegraph => "Fig. 2",
            Experiment::Fig3Zz => "Fig. 3",
            Experiment::Fig4Gates => "Fig. 4 + gate fit table",
            Experiment::AppFSpectrum => "Fig. 6 + operating points",
            Experiment::AppDRto => "Fig. 5",
            Experiment::AppHDevices => "Fig. 7 + device table",
            Experiment::Custom => "user-defined",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::Fig1Comparison => "Ramsey, spin echo and T1 vs RB Ramsey and RB echo on the same noise",
            Experiment::Fig2Telegraph => "RB Ramsey idle error vs duration with a T1 + telegraph fit and asymptotes",
            Experiment::Fig3Zz => "simultaneous-RB excess error vs gate time under ZZ coupling, quadratic fit",
            Experiment::Fig4Gates => "interleaved error of I, XX, Z and YX gates vs duration, linear/quadratic fits",
            Experiment::AppFSpectrum => "white + telegraph fits at four operating points with 1/f flux-noise lines",
            Experiment::AppDRto => "repeated-Ramsey flux-noise spectrum with an aliased 1/f + white fit",
            Experiment::AppHDevices => "T1 + telegraph round trips for four other devices",
            Experiment::Custom => "any single protocol with a user-supplied configuration",
        }
    }

    /// Aligned `name  figure  description` table.
    pub fn table() -> String {
        let mut s = String::new();
        for e in Self::ALL {
            s.push_str(&format!("{:<16} {:<26} {}\n", e.name(), e.figure(), e.description()));
        }
        s
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL.into_iter().find(|e| e.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Self::ALL.iter().map(|e| e.name()).collect();
            format!("unknown experiment '{s}', expected one of: {}", names.join(", "))
        })
    }
}
