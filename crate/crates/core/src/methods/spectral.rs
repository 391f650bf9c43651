use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use ndarray::Array2;

use super::ace::SingleModeSpec;
use super::MethodError;
use crate::expr::{HBAR, KB};
use crate::system::SystemLiouvillian;
use crate::tensor::{dagger, kron};
use crate::{ComplexMatrix, C64};

/// Spectral density `J(ω)` in ps⁻¹ for `ω` in ps⁻¹.
#[derive(Clone)]
pub enum SpectralDensity {
    Flat(f64),
    /// Linear interpolation between samples, zero outside.
    Table { omega: Vec<f64>, j: Vec<f64> },
    /// Deformation-potential coupling of a spherical quantum dot to
    /// longitudinal acoustic phonons in GaAs; radii in nm.
    QdPhonon { a_e: f64, a_h: f64 },
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for SpectralDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectralDensity::Flat(x) => write!(f, "Flat({x})"),
            SpectralDensity::Table { omega, .. } => write!(f, "Table({} samples)", omega.len()),
            SpectralDensity::QdPhonon { a_e, a_h } => write!(f, "QdPhonon {{ a_e: {a_e}, a_h: {a_h} }}"),
            SpectralDensity::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl SpectralDensity {
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SpectralDensity::Custom(Arc::new(f))
    }

    /// Default quantum dot with `a_e = 4 nm`, `a_h = a_e/1.15`.
    pub fn qd_phonon_default() -> Self {
        SpectralDensity::QdPhonon { a_e: 4.0, a_h: 4.0 / 1.15 }
    }

    pub fn eval(&self, omega: f64) -> f64 {
        match self {
            SpectralDensity::Flat(x) => *x,
            SpectralDensity::Table { omega: w, j } => {
                if w.is_empty() || omega < w[0] || omega > w[w.len() - 1] {
                    return 0.0;
                }
                let k = w.partition_point(|&x| x <= omega);
                if k == w.len() {
                    return j[w.len() - 1];
                }
                let s = (omega - w[k - 1]) / (w[k] - w[k - 1]);
                j[k - 1] * (1.0 - s) + j[k] * s
            }
            SpectralDensity::QdPhonon { a_e, a_h } => qd_phonon_j(omega, *a_e, *a_h),
            SpectralDensity::Custom(f) => f(omega),
        }
    }
}

/// Parses a two-column table `ω J(ω)`; `#` starts a comment.
pub fn parse_spectral_table(text: &str) -> Result<SpectralDensity, MethodError> {
    let mut omega = Vec::new();
    let mut j = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let cols: Vec<&str> = line.split('#').next().unwrap_or("").split_whitespace().collect();
        if cols.is_empty() {
            continue;
        }
        let bad = |msg: String| MethodError::Table { line: lineno + 1, msg };
        if cols.len() < 2 {
            return Err(bad("expected 2 columns".into()));
        }
        let w: f64 = cols[0].parse().map_err(|_| bad(format!("not a number: '{}'", cols[0])))?;
        let v: f64 = cols[1].parse().map_err(|_| bad(format!("not a number: '{}'", cols[1])))?;
        if omega.last().is_some_and(|&p| w <= p) {
            return Err(bad("frequencies must be strictly increasing".into()));
        }
        if v < 0.0 {
            return Err(bad(format!("negative spectral density {v}")));
        }
        omega.push(w);
        j.push(v);
    }
    if omega.len() < 2 {
        return Err(MethodError::Table { line: 0, msg: "a spectral density table needs at least two rows".into() });
    }
    Ok(SpectralDensity::Table { omega, j })
}

pub fn spectral_from_file(path: &Path) -> Result<SpectralDensity, MethodError> {
    let text = std::fs::read_to_string(path).map_err(|e| MethodError::Io(path.display().to_string(), e))?;
    parse_spectral_table(&text)
}

const GAAS_DENSITY: f64 = 5370.0;
const GAAS_SOUND: f64 = 5110.0;
const D_E: f64 = 7.0;
const D_H: f64 = -3.5;
const EV: f64 = 1.602176634e-19;
const HBAR_SI: f64 = 1.054571817e-34;

/// `J(ω) = ω³/(4π²ρħc⁵)·(D_e e^{−ω²a_e²/4c²} − D_h e^{−ω²a_h²/4c²})²`.
pub fn qd_phonon_j(omega: f64, a_e: f64, a_h: f64) -> f64 {
    if omega <= 0.0 {
        return 0.0;
    }
    let w = omega * 1e12;
    let (ae, ah) = (a_e * 1e-9, a_h * 1e-9);
    let c2 = GAAS_SOUND * GAAS_SOUND;
    let form = D_E * EV * (-w * w * ae * ae / (4.0 * c2)).exp() - D_H * EV * (-w * w * ah * ah / (4.0 * c2)).exp();
    let j_si = w.powi(3) / (4.0 * PI * PI * GAAS_DENSITY * HBAR_SI * GAAS_SOUND.powi(5)) * form * form;
    j_si * 1e-12
}

/// Bose or Fermi statistics of the bath modes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ModeKind {
    /// Bosons truncated to `levels` states.
    Boson { levels: usize },
    /// Two-level fermionic modes with Fermi energy in meV.
    Fermion { e_fermi: f64 },
}

#[derive(Debug, Clone)]
pub enum Coupling {
    /// The same `g` (ps⁻¹) for every mode.
    Constant(f64),
    Density(SpectralDensity),
}

/// Parameters of a discretized bath.
#[derive(Debug, Clone)]
pub struct Bath {
    pub kind: ModeKind,
    pub n_modes: usize,
    pub sys_op: ComplexMatrix,
    pub coupling: Coupling,
    pub omega_min: f64,
    pub omega_max: f64,
    /// Kelvin.
    pub temperature: f64,
    pub subtract_polaron_shift: bool,
}

impl Bath {
    /// Coupling constants matching a Markovian rate Γ: `J = Γ/(2π)`.
    pub fn rate_coupling(rate: f64) -> Coupling {
        Coupling::Density(SpectralDensity::Flat(rate / (2.0 * PI)))
    }

    /// Mode frequencies and coupling constants.
    pub fn modes(&self) -> Result<Vec<(f64, f64)>, MethodError> {
        if self.n_modes == 0 {
            return Err(MethodError::Invalid("number of bath modes must be at least 1".into()));
        }
        if self.omega_max <= self.omega_min {
            return Err(MethodError::Invalid(format!(
                "omega_max ({}) must exceed omega_min ({})",
                self.omega_max, self.omega_min
            )));
        }
        let dw = (self.omega_max - self.omega_min) / self.n_modes as f64;
        Ok((0..self.n_modes)
            .map(|k| {
                let w = self.omega_min + (k as f64 + 0.5) * dw;
                let g = match &self.coupling {
                    Coupling::Constant(g) => *g,
                    Coupling::Density(j) => (j.eval(w) * dw).max(0.0).sqrt(),
                };
                (w, g)
            })
            .collect())
    }
}

/// Recommended number of modes `0.4·(ω_max − ω_min)·(t_e − t_a)`.
pub fn recommended_modes(omega_min: f64, omega_max: f64, ta: f64, te: f64) -> usize {
    (0.4 * (omega_max - omega_min) * (te - ta)).ceil().max(1.0) as usize
}

/// Thermal state of a truncated harmonic mode, renormalized. Returns the
/// state and the discarded weight.
pub fn thermal_boson_state(omega: f64, temperature: f64, levels: usize) -> Result<(ComplexMatrix, f64), MethodError> {
    let mut rho = Array2::zeros((levels, levels));
    if temperature <= 0.0 {
        rho[[0, 0]] = C64::new(1.0, 0.0);
        return Ok((rho, 0.0));
    }
    if omega <= 0.0 {
        return Err(MethodError::Invalid(format!("thermal boson mode needs a positive frequency, got {omega}")));
    }
    let x = HBAR * omega / (KB * temperature);
    let weights: Vec<f64> = (0..levels).map(|n| (-(n as f64) * x).exp()).collect();
    let kept: f64 = weights.iter().sum::<f64>() * (1.0 - (-x).exp());
    let z: f64 = weights.iter().sum();
    for (n, w) in weights.iter().enumerate() {
        rho[[n, n]] = C64::new(w / z, 0.0);
    }
    Ok((rho, 1.0 - kept))
}

/// Fermi occupation `1/(e^{(ħω−E_F)/k_BT} + 1)`.
pub fn fermi_occupation(omega: f64, e_fermi: f64, temperature: f64) -> f64 {
    let e = HBAR * omega - e_fermi;
    if temperature <= 0.0 {
        return if e < 0.0 {
            1.0
        } else if e > 0.0 {
            0.0
        } else {
            0.5
        };
    }
    1.0 / ((e / (KB * temperature)).exp() + 1.0)
}

/// Single-mode specifications for a discretized bath coupled through
/// `sys_op` (which may differ from `bath.sys_op`, e.g. a reduced operator).
pub fn discretize_continuum(bath: &Bath, sys_op: &ComplexMatrix) -> Result<Vec<SingleModeSpec>, MethodError> {
    let d = sys_op.nrows();
    let levels = match bath.kind {
        ModeKind::Boson { levels } => levels,
        ModeKind::Fermion { .. } => 2,
    };
    if levels < 1 {
        return Err(MethodError::Invalid("bath modes need at least one level".into()));
    }
    let mut b: ComplexMatrix = Array2::zeros((levels, levels));
    for n in 1..levels {
        b[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    let num = dagger(&b).dot(&b);
    let id_s: ComplexMatrix = Array2::eye(d);
    let id_m: ComplexMatrix = Array2::eye(levels);
    let a_dag = dagger(sys_op);
    let shift_op = a_dag.dot(sys_op);
    let h_num = kron(&id_s, &num);
    let h_cpl = kron(sys_op, &dagger(&b)) + kron(&a_dag, &b);
    let h_ps = kron(&shift_op, &id_m);
    let mut specs = Vec::with_capacity(bath.n_modes);
    let mut worst_discard = 0.0f64;
    for (w, g) in bath.modes()? {
        let mut h = h_num.mapv(|x| x * HBAR * w) + h_cpl.mapv(|x| x * HBAR * g);
        if bath.subtract_polaron_shift && g != 0.0 {
            if w == 0.0 {
                return Err(MethodError::ZeroFrequency);
            }
            h = h + h_ps.mapv(|x| x * HBAR * g * g / w);
        }
        let rho = match bath.kind {
            ModeKind::Boson { levels } => {
                let (rho, discarded) = thermal_boson_state(w, bath.temperature, levels)?;
                worst_discard = worst_discard.max(discarded);
                rho
            }
            ModeKind::Fermion { e_fermi } => {
                let f = fermi_occupation(w, e_fermi, bath.temperature);
                Array2::from_diag(&ndarray::arr1(&[C64::new(1.0 - f, 0.0), C64::new(f, 0.0)]))
            }
        };
        let mut gen = SystemLiouvillian::new(d * levels);
        gen.add_hamiltonian(&h)?;
        specs.push(SingleModeSpec::new(d, gen, rho)?);
    }
    if worst_discard > 1e-6 {
        log::warn!("thermal boson states truncated to the mode Hilbert space discard up to {worst_discard:.3e} of the weight");
    }
    Ok(specs)
}
