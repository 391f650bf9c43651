//! Process tensor generation: environment modes combined by ACE, and
//! Gaussian spin-boson baths.

mod ace;
mod gaussian;
mod spectral;

pub use ace::{ace_sequential, ace_tree, pt_from_single_mode, Grid, Schedule, SingleModeSpec};
pub use gaussian::{
    bath_correlation, gaussian_dnc, gaussian_jp, gaussian_kernels, gaussian_periodic, gaussian_pt, influence_weight,
    GaussianBath, GaussianKernel, GaussianMethod,
};
pub use spectral::{
    discretize_continuum, fermi_occupation, parse_spectral_table, qd_phonon_j, recommended_modes, spectral_from_file,
    thermal_boson_state, Bath, Coupling, ModeKind, SpectralDensity,
};

use crate::ptmpo::{Degeneracy, ProcessTensor, PtError};
use crate::system::SystemError;
use crate::tensor::TensorError;

#[derive(Debug, thiserror::Error)]
pub enum MethodError {
    #[error("{0}")]
    Invalid(String),
    #[error("invalid initial environment state: {0}")]
    InvalidState(String),
    #[error("a bath mode sits at zero frequency while the polaron shift is subtracted; shift the frequency window or use an even number of modes")]
    ZeroFrequency,
    #[error("spectral density table line {line}: {msg}")]
    Table { line: usize, msg: String },
    #[error("cannot read '{0}': {1}")]
    Io(String, std::io::Error),
    #[error("quadrature for {what} did not converge: achieved error {achieved:.3e}, requested {requested:.3e} (singular spectral density near the window edge?)")]
    Quadrature { what: String, achieved: f64, requested: f64 },
    #[error("periodic PT needs a memory cut-off that is a power of two, got {0} steps; adjust t_mem or n_mem")]
    NotPowerOfTwo(usize),
    #[error(transparent)]
    Pt(#[from] PtError),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// ACE PT for a discretized bath. With `reduce`, modes couple to the
/// degeneracy-reduced operator and the result is expanded back.
pub fn ace_from_bath(bath: &Bath, grid: &Grid, schedule: &Schedule, tree: bool, reduce: bool) -> Result<ProcessTensor, MethodError> {
    let hermitian = crate::tensor::is_hermitian(&bath.sys_op, 1e-10);
    let deg = if hermitian && reduce { Some(Degeneracy::new(&bath.sys_op, true)?) } else { None };
    let op = deg.as_ref().map(|d| d.group_operator()).unwrap_or_else(|| bath.sys_op.clone());
    let modes = discretize_continuum(bath, &op)?;
    let pt = if tree { ace_tree(&modes, grid, schedule)? } else { ace_sequential(&modes, grid, schedule)? };
    match deg {
        Some(d) => Ok(d.expand(&pt)?),
        None => Ok(pt),
    }
}

/// Suggested memory time: four times the time after which `|C(t)|` has
/// dropped below a tenth of `|C(0)|`, scanned on a grid of `dt` up to `t_max`.
pub fn suggest_memory_time(bath: &GaussianBath, dt: f64, t_max: f64) -> Result<Option<f64>, MethodError> {
    let c0 = bath_correlation(bath, 0.0)?.norm();
    if c0 == 0.0 {
        return Ok(Some(0.0));
    }
    let mut t = dt;
    while t <= t_max {
        if bath_correlation(bath, t)?.norm() < 0.1 * c0 {
            return Ok(Some(4.0 * t));
        }
        t += dt;
    }
    Ok(None)
}
