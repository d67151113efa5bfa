use std::f64::consts::PI;

use crate::error::{Error, Result};

/// `E_J/E_C ≈ (ω₀₁/η − 1)²/8` for a transmon with anharmonicity `η < 0`.
/// Both arguments are angular frequencies; the sign of `eta` is ignored.
pub fn ej_over_ec(omega01: f64, eta: f64) -> Result<f64> {
    if !(eta.is_finite() && eta != 0.0 && omega01.is_finite()) {
        return Err(Error::domain(format!("invalid transmon frequencies ω01={omega01}, η={eta}")));
    }
    let ratio = omega01 / eta.abs();
    if ratio <= 1.0 {
        return Err(Error::domain(format!("unphysical transmon: ω01/|η| = {ratio} <= 1")));
    }
    Ok((ratio + 1.0).powi(2) / 8.0)
}

/// Charge dispersion of level `m` in Hz for a transmon with the given
/// `E_J/E_C` and charging energy `e_c_hz` (Hz):
/// `ε_m = (−1)^m E_C 2^{4m+5}/m! √(2/π) (E_J/2E_C)^{m/2+3/4} exp(−√(8E_J/E_C))`.
///
/// `|ε_m|` decreases with `E_J/E_C` once `E_J/E_C > (m/2 + 3/4)²/2`, which
/// covers the transmon regime for all low levels.
pub fn charge_dispersion_from_ratio(ej_over_ec: f64, e_c_hz: f64, m: u32) -> Result<f64> {
    if !(ej_over_ec.is_finite() && ej_over_ec > 0.0 && e_c_hz.is_finite() && e_c_hz > 0.0) {
        return Err(Error::domain(format!("invalid E_J/E_C={ej_over_ec} or E_C={e_c_hz}")));
    }
    let m_f = m as f64;
    let factorial: f64 = (1..=m).map(f64::from).product();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let log_mag = e_c_hz.ln() + (4.0 * m_f + 5.0) * std::f64::consts::LN_2 - factorial.ln()
        + 0.5 * (2.0 / PI).ln()
        + (0.5 * m_f + 0.75) * (0.5 * ej_over_ec).ln()
        - (8.0 * ej_over_ec).sqrt();
    Ok(sign * log_mag.exp())
}

/// Charge dispersion of level `m` in Hz from the angular transition frequency
/// and anharmonicity, taking `E_C = ħ|η|`.
pub fn charge_dispersion(omega01: f64, eta: f64, m: u32) -> Result<f64> {
    let ratio = ej_over_ec(omega01, eta)?;
    charge_dispersion_from_ratio(ratio, eta.abs() / (2.0 * PI), m)
}

/// Static ZZ coupling `Ω_ZZ = 4g²η/(Δ² − η²)` for equal anharmonicities;
/// all arguments and the result are angular frequencies.
pub fn omega_zz(g: f64, eta: f64, delta: f64) -> Result<f64> {
    let denom = delta * delta - eta * eta;
    if denom.abs() <= 1e-12 * (delta * delta + eta * eta) || denom == 0.0 {
        return Err(Error::Singular(format!("level crossing: Δ = {delta} equals ±η = {eta}")));
    }
    Ok(4.0 * g * g * eta / denom)
}

/// Error per gate from an always-on ZZ coupling, `(π²/6)(Ω_ZZ t_gate/2π)²`.
pub fn zz_error_per_gate(omega_zz: f64, t_gate: f64) -> Result<f64> {
    if !(t_gate.is_finite() && t_gate >= 0.0) {
        return Err(Error::domain(format!("t_gate must be finite and >= 0, got {t_gate}")));
    }
    let x = omega_zz * t_gate / (2.0 * PI);
    Ok(PI * PI / 6.0 * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_PI: f64 = 2.0 * PI;

    #[test]
    fn dispersion_values() {
        let e = charge_dispersion(TWO_PI * 6e9, -TWO_PI * 215e6, 1).unwrap();
        assert!((e.abs() - 3.442).abs() < 5e-3, "{e}");
        let e = charge_dispersion(TWO_PI * 4e9, -TWO_PI * 215e6, 1).unwrap();
        assert!((e.abs() - 14.30e3).abs() < 20.0, "{e}");
        let e = charge_dispersion(TWO_PI * 4.387e9, -TWO_PI * 334e6, 1).unwrap();
        assert!((e.abs() - 2.3275e6).abs() < 1e3, "{e}");
        assert!(e < 0.0);
    }

    #[test]
    fn dispersion_domain() {
        assert!(charge_dispersion(TWO_PI * 100e6, -TWO_PI * 215e6, 1).is_err());
        assert!(charge_dispersion(TWO_PI * 4e9, 0.0, 1).is_err());
    }

    #[test]
    fn zz_values() {
        let w = omega_zz(TWO_PI * 15e6, -TWO_PI * 220e6, TWO_PI * 750e6).unwrap();
        assert!((w / TWO_PI + 0.3854e6).abs() < 1e3, "{}", w / TWO_PI);
        assert_eq!(omega_zz(0.0, -1.0, 3.0).unwrap(), 0.0);
        assert!(omega_zz(1.0, -2.0, 2.0).is_err());
        assert!(omega_zz(1.0, -2.0, -2.0).is_err());
        assert_eq!(zz_error_per_gate(0.0, 1e-7).unwrap(), 0.0);
        let e = zz_error_per_gate(TWO_PI * 0.4e6, 100e-9).unwrap();
        assert!((e - PI * PI / 6.0 * 0.04f64.powi(2)).abs() < 1e-15);
    }
}
