use std::f64::consts::PI;
use std::path::Path;

use super::SystemError;
use crate::expr::HBAR;
use crate::C64;

/// Scalar pulse envelope f(t).
#[derive(Debug, Clone, PartialEq)]
pub enum Envelope {
    /// Gaussian with center `t_c` (ps), duration `fwhm` (ps), pulse area and
    /// detuning (meV).
    Gauss { t_c: f64, fwhm: f64, area: f64, detuning: f64 },
    /// Tabulated samples with linear interpolation, zero outside the range.
    Table { t: Vec<f64>, f: Vec<C64> },
}

impl Envelope {
    pub fn value(&self, t: f64) -> C64 {
        match self {
            Envelope::Gauss { t_c, fwhm, area, detuning } => gauss_envelope(*t_c, *fwhm, *area, *detuning, t),
            Envelope::Table { t: ts, f } => {
                if ts.is_empty() || t < ts[0] || t > ts[ts.len() - 1] {
                    return C64::new(0.0, 0.0);
                }
                let j = ts.partition_point(|&x| x <= t);
                if j == ts.len() {
                    return f[ts.len() - 1];
                }
                let (t0, t1) = (ts[j - 1], ts[j]);
                let w = (t - t0) / (t1 - t0);
                f[j - 1] * (1.0 - w) + f[j] * w
            }
        }
    }
}

/// f(t) = A/(√(2π)σ)·exp(−(t−t_c)²/(2σ²))·exp(−i(δ/ħ)t), σ = FWHM/(2√(2 ln 2)).
pub fn gauss_envelope(t_c: f64, fwhm: f64, area: f64, detuning: f64, t: f64) -> C64 {
    let sigma = fwhm / (2.0 * (2.0 * 2f64.ln()).sqrt());
    let amp = area / ((2.0 * PI).sqrt() * sigma) * (-0.5 * (t - t_c).powi(2) / sigma.powi(2)).exp();
    C64::from_polar(amp, -detuning / HBAR * t)
}

/// Parses a three-column pulse table `t Re(f) Im(f)`; `#` starts a comment.
pub fn parse_pulse_table(text: &str) -> Result<Envelope, SystemError> {
    let mut t = Vec::new();
    let mut f = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let data = line.split('#').next().unwrap_or("");
        let cols: Vec<&str> = data.split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.parse::<f64>().map_err(|_| SystemError::Table { line: lineno + 1, msg: format!("not a number: '{s}'") })
        };
        if cols.len() < 3 {
            return Err(SystemError::Table { line: lineno + 1, msg: "expected 3 columns".into() });
        }
        let tj = parse(cols[0])?;
        if let Some(&prev) = t.last() {
            if tj <= prev {
                return Err(SystemError::Table { line: lineno + 1, msg: "times must be strictly increasing".into() });
            }
        }
        t.push(tj);
        f.push(C64::new(parse(cols[1])?, parse(cols[2])?));
    }
    if t.len() < 2 {
        return Err(SystemError::Table { line: 0, msg: "a pulse table needs at least two rows".into() });
    }
    Ok(Envelope::Table { t, f })
}

pub fn pulse_from_file(path: &Path) -> Result<Envelope, SystemError> {
    let text = std::fs::read_to_string(path).map_err(|e| SystemError::Io(path.display().to_string(), e))?;
    parse_pulse_table(&text)
}
