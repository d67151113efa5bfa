use std::io::Write;

use crate::error::{Error, Result};

/// A realization of the angular detuning δω(t) (rad/s) on `[0, duration]`.
#[derive(Debug, Clone, PartialEq)]
pub enum FrequencyTrace {
    /// The same detuning for the whole duration.
    Constant { value: f64, duration: f64 },
    /// `levels[0]` on `[0, switch_times[0])`, `levels[i]` on
    /// `[switch_times[i−1], switch_times[i])`, and so on. `cumulative[i]` holds
    /// the phase accumulated up to `switch_times[i]`.
    Piecewise { switch_times: Vec<f64>, levels: Vec<f64>, cumulative: Vec<f64>, duration: f64 },
    /// Samples `values[i]` at `t = i·dt`, linearly interpolated and repeated
    /// with period `values.len()·dt`. `cumulative[i]` is the trapezoid phase
    /// up to `i·dt` for `i` in `0..=values.len()`.
    Sampled { dt: f64, values: Vec<f64>, cumulative: Vec<f64>, duration: f64 },
    /// Superposition of independent components sharing one duration.
    Sum { parts: Vec<FrequencyTrace>, duration: f64 },
}

impl FrequencyTrace {
    pub fn zero(duration: f64) -> Self {
        FrequencyTrace::Constant { value: 0.0, duration }
    }

    pub fn constant(value: f64, duration: f64) -> Self {
        FrequencyTrace::Constant { value, duration }
    }

    /// Builds a piecewise-constant trace; `levels.len()` must be `switch_times.len() + 1`.
    pub fn piecewise(switch_times: Vec<f64>, levels: Vec<f64>, duration: f64) -> Result<Self> {
        if levels.len() != switch_times.len() + 1 {
            return Err(Error::domain("piecewise trace needs one more level than switch times"));
        }
        let mut prev = 0.0;
        let mut cumulative = Vec::with_capacity(switch_times.len());
        let mut acc = 0.0;
        for (i, &t) in switch_times.iter().enumerate() {
            if !(t > prev || (i == 0 && t >= 0.0)) || t > duration {
                return Err(Error::domain(format!("switch times must increase within [0, {duration}]")));
            }
            acc += levels[i] * (t - prev);
            cumulative.push(acc);
            prev = t;
        }
        Ok(FrequencyTrace::Piecewise { switch_times, levels, cumulative, duration })
    }

    /// Builds a periodic sampled trace.
    pub fn sampled(dt: f64, values: Vec<f64>, duration: f64) -> Result<Self> {
        if !(dt > 0.0) || values.is_empty() {
            return Err(Error::domain("sampled trace needs dt > 0 and at least one sample"));
        }
        let n = values.len();
        let mut cumulative = Vec::with_capacity(n + 1);
        cumulative.push(0.0);
        let mut acc = 0.0;
        for i in 0..n {
            acc += 0.5 * dt * (values[i] + values[(i + 1) % n]);
            cumulative.push(acc);
        }
        Ok(FrequencyTrace::Sampled { dt, values, cumulative, duration })
    }

    pub fn sum(parts: Vec<FrequencyTrace>) -> Result<Self> {
        let duration = parts.iter().map(|p| p.duration()).fold(f64::INFINITY, f64::min);
        if parts.is_empty() {
            return Err(Error::domain("empty sum of traces"));
        }
        Ok(FrequencyTrace::Sum { parts, duration })
    }

    pub fn duration(&self) -> f64 {
        match self {
            FrequencyTrace::Constant { duration, .. }
            | FrequencyTrace::Piecewise { duration, .. }
            | FrequencyTrace::Sampled { duration, .. }
            | FrequencyTrace::Sum { duration, .. } => *duration,
        }
    }

    /// Detuning at time `t` (right-continuous at switches).
    pub fn value_at(&self, t: f64) -> f64 {
        match self {
            FrequencyTrace::Constant { value, .. } => *value,
            FrequencyTrace::Piecewise { switch_times, levels, .. } => {
                levels[switch_times.partition_point(|&s| s <= t)]
            }
            FrequencyTrace::Sampled { dt, values, .. } => {
                let n = values.len();
                let period = n as f64 * dt;
                let local = t.rem_euclid(period);
                let i = ((local / dt).floor() as usize).min(n - 1);
                let frac = local / dt - i as f64;
                values[i] + frac * (values[(i + 1) % n] - values[i])
            }
            FrequencyTrace::Sum { parts, .. } => parts.iter().map(|p| p.value_at(t)).sum(),
        }
    }

    /// Phase `∫₀ᵗ δω dt'` without range checks.
    pub fn phase_at(&self, t: f64) -> f64 {
        match self {
            FrequencyTrace::Constant { value, .. } => value * t,
            FrequencyTrace::Piecewise { switch_times, levels, cumulative, .. } => {
                let k = switch_times.partition_point(|&s| s <= t);
                if k == 0 {
                    levels[0] * t
                } else {
                    cumulative[k - 1] + levels[k] * (t - switch_times[k - 1])
                }
            }
            FrequencyTrace::Sampled { dt, values, cumulative, .. } => {
                let n = values.len();
                let period = n as f64 * dt;
                let cycles = (t / period).floor();
                let local = t - cycles * period;
                let i = ((local / dt).floor() as usize).min(n - 1);
                let h = local - i as f64 * dt;
                let v0 = values[i];
                let v1 = values[(i + 1) % n];
                let v_h = v0 + (v1 - v0) * h / dt;
                cycles * cumulative[n] + cumulative[i] + 0.5 * h * (v0 + v_h)
            }
            FrequencyTrace::Sum { parts, .. } => parts.iter().map(|p| p.phase_at(t)).sum(),
        }
    }

    /// Writes `(t, δω)` rows as CSV with a header; piecewise traces emit the
    /// level on both sides of every switch, sampled traces emit their grid over
    /// the duration, constant traces emit the two end points.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t_s,delta_omega_rad_per_s")?;
        let mut row = |t: f64, v: f64| writeln!(w, "{t:.16e},{v:.16e}");
        match self {
            FrequencyTrace::Constant { value, duration } => {
                row(0.0, *value)?;
                row(*duration, *value)?;
            }
            FrequencyTrace::Piecewise { switch_times, levels, duration, .. } => {
                row(0.0, levels[0])?;
                for (i, &t) in switch_times.iter().enumerate() {
                    row(t, levels[i])?;
                    row(t, levels[i + 1])?;
                }
                row(*duration, *levels.last().expect("non-empty"))?;
            }
            FrequencyTrace::Sampled { .. } | FrequencyTrace::Sum { .. } => {
                let duration = self.duration();
                let dt = self.finest_step().unwrap_or(duration / 1000.0);
                let n = (duration / dt).floor() as usize;
                for i in 0..=n {
                    let t = i as f64 * dt;
                    row(t, self.value_at(t))?;
                }
            }
        }
        Ok(())
    }

    fn finest_step(&self) -> Option<f64> {
        match self {
            FrequencyTrace::Sampled { dt, .. } => Some(*dt),
            FrequencyTrace::Sum { parts, .. } => {
                parts.iter().filter_map(|p| p.finest_step()).reduce(f64::min)
            }
            _ => None,
        }
    }
}

/// Phase accumulated between `t0` and `t1`: exact for constant and
/// piecewise-constant traces, trapezoidal for sampled traces.
pub fn integrate_phase(trace: &FrequencyTrace, t0: f64, t1: f64) -> Result<f64> {
    let duration = trace.duration();
    let slack = 1e-12 * duration.max(1e-300);
    if !(t0 >= 0.0 && t0 <= t1 && t1 <= duration + slack) {
        return Err(Error::domain(format!(
            "interval [{t0}, {t1}] outside the trace [0, {duration}]"
        )));
    }
    if t0 == t1 {
        return Ok(0.0);
    }
    Ok(trace.phase_at(t1) - trace.phase_at(t0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_phase() {
        let tr = FrequencyTrace::constant(2.5e6, 1e-6);
        assert!((integrate_phase(&tr, 0.0, 4e-7).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(integrate_phase(&tr, 3e-7, 3e-7).unwrap(), 0.0);
        assert!(integrate_phase(&tr, 0.0, 2e-6).is_err());
        assert!(integrate_phase(&tr, 5e-7, 4e-7).is_err());
    }

    #[test]
    fn three_switch_trace_by_hand() {
        // +1 on [0,1), −2 on [1,2.5), +3 on [2.5,4), −1 on [4,5]
        let tr = FrequencyTrace::piecewise(vec![1.0, 2.5, 4.0], vec![1.0, -2.0, 3.0, -1.0], 5.0).unwrap();
        assert!((integrate_phase(&tr, 0.0, 5.0).unwrap() - (1.0 - 3.0 + 4.5 - 1.0)).abs() < 1e-12);
        assert!((integrate_phase(&tr, 0.5, 3.0).unwrap() - (0.5 - 3.0 + 1.5)).abs() < 1e-12);
        assert!((integrate_phase(&tr, 2.5, 4.0).unwrap() - 4.5).abs() < 1e-12);
        assert_eq!(tr.value_at(2.5), 3.0);
        assert!(FrequencyTrace::piecewise(vec![2.0, 1.0], vec![0.0; 3], 5.0).is_err());
    }

    #[test]
    fn sampled_trapezoid_and_periodicity() {
        let tr = FrequencyTrace::sampled(1.0, vec![0.0, 2.0, 0.0, -2.0], 10.0).unwrap();
        assert!((integrate_phase(&tr, 0.0, 1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!((integrate_phase(&tr, 0.0, 0.5).unwrap() - 0.25).abs() < 1e-12);
        assert!(integrate_phase(&tr, 0.0, 4.0).unwrap().abs() < 1e-12);
        let a = integrate_phase(&tr, 0.3, 1.7).unwrap();
        let b = integrate_phase(&tr, 4.3, 5.7).unwrap();
        assert!((a - b).abs() < 1e-12);
        assert!((tr.value_at(5.5) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn csv_dump_has_header_and_rows() {
        let tr = FrequencyTrace::piecewise(vec![1.0], vec![1.0, -1.0], 2.0).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(text.starts_with("t_s,delta_omega_rad_per_s\n"));
    }
}
