//! Free system propagators in Liouville space.
//!
//! Density matrices are vectorized row-major, `α = ν·D + μ`, so left
//! multiplication by `A` is `A⊗I` and right multiplication by `B` is `I⊗Bᵀ`.

mod pulse;

use ndarray::Array2;

use crate::expr::HBAR;
use crate::tensor::{dagger, expm, is_hermitian, kron, TensorError};
use crate::{ComplexMatrix, C64};

pub use pulse::{gauss_envelope, parse_pulse_table, pulse_from_file, Envelope};

#[derive(Debug, thiserror::Error)]
pub enum SystemError {
    #[error("operator has shape {found:?}, system dimension is {dim}")]
    Shape { dim: usize, found: (usize, usize) },
    #[error("Hamiltonian is not Hermitian at t = {0} ps")]
    NonHermitian(f64),
    #[error("negative Lindblad rate {0}")]
    NegativeRate(f64),
    #[error("time step must be positive, got {0}")]
    TimeStep(f64),
    #[error("table line {line}: {msg}")]
    Table { line: usize, msg: String },
    #[error("cannot read '{0}': {1}")]
    Io(String, std::io::Error),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// Time-dependent drive `f(t)·d̂ + f*(t)·d̂†`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    pub envelope: Envelope,
    pub op: ComplexMatrix,
}

/// Hamiltonian, pulses and Lindblad terms of the open system.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemLiouvillian {
    pub dim: usize,
    pub h0: ComplexMatrix,
    pub pulses: Vec<Pulse>,
    pub lindblad: Vec<(f64, ComplexMatrix)>,
}

impl SystemLiouvillian {
    pub fn new(dim: usize) -> Self {
        SystemLiouvillian { dim, h0: Array2::zeros((dim, dim)), pulses: Vec::new(), lindblad: Vec::new() }
    }

    fn check(&self, m: &ComplexMatrix) -> Result<(), SystemError> {
        if m.dim() != (self.dim, self.dim) {
            return Err(SystemError::Shape { dim: self.dim, found: m.dim() });
        }
        Ok(())
    }

    pub fn add_hamiltonian(&mut self, h: &ComplexMatrix) -> Result<(), SystemError> {
        self.check(h)?;
        self.h0 = &self.h0 + h;
        Ok(())
    }

    pub fn add_pulse(&mut self, envelope: Envelope, op: ComplexMatrix) -> Result<(), SystemError> {
        self.check(&op)?;
        self.pulses.push(Pulse { envelope, op });
        Ok(())
    }

    pub fn add_lindblad(&mut self, rate: f64, op: ComplexMatrix) -> Result<(), SystemError> {
        self.check(&op)?;
        if rate < 0.0 {
            return Err(SystemError::NegativeRate(rate));
        }
        self.lindblad.push((rate, op));
        Ok(())
    }

    pub fn is_time_dependent(&self) -> bool {
        !self.pulses.is_empty()
    }

    pub fn hamiltonian(&self, t: f64) -> ComplexMatrix {
        let mut h = self.h0.clone();
        for p in &self.pulses {
            let f = p.envelope.value(t);
            h = h + p.op.mapv(|x| x * f) + dagger(&p.op).mapv(|x| x * f.conj());
        }
        h
    }

    /// Liouvillian `L(t)` as a `D² × D²` matrix.
    pub fn liouvillian_matrix(&self, t: f64) -> Result<ComplexMatrix, SystemError> {
        let h = self.hamiltonian(t);
        let scale = h.iter().fold(1.0f64, |a, x| a.max(x.norm()));
        if !is_hermitian(&h, 1e-10 * scale) {
            return Err(SystemError::NonHermitian(t));
        }
        Ok(liouvillian(&h, &self.lindblad))
    }

    /// `exp(L(t + dt/2)·dt)`: the generator is frozen at the step midpoint.
    pub fn step_propagator(&self, t: f64, dt: f64) -> Result<ComplexMatrix, SystemError> {
        if dt <= 0.0 {
            return Err(SystemError::TimeStep(dt));
        }
        let l = self.liouvillian_matrix(t + 0.5 * dt)?;
        Ok(expm(&l.mapv(|x| x * dt))?)
    }
}

/// `−(i/ħ)[H,·] + Σ γ D_A` in row-major Liouville space.
pub fn liouvillian(h: &ComplexMatrix, lindblad: &[(f64, ComplexMatrix)]) -> ComplexMatrix {
    let d = h.nrows();
    let id: ComplexMatrix = Array2::eye(d);
    let mi = C64::new(0.0, -1.0 / HBAR);
    let mut l = (kron(h, &id) - kron(&id, &h.t().to_owned())).mapv(|x| x * mi);
    for (rate, a) in lindblad {
        let ada = dagger(a).dot(a);
        let term = kron(a, &a.mapv(|x| x.conj()))
            - (kron(&ada, &id) + kron(&id, &ada.t().to_owned())).mapv(|x| x * 0.5);
        l = l + term.mapv(|x| x * *rate);
    }
    l
}

/// `(O⊗I)`: left multiplication in Liouville space.
pub fn left_superop(o: &ComplexMatrix) -> ComplexMatrix {
    kron(o, &Array2::eye(o.nrows()))
}

/// `(I⊗Oᵀ)`: right multiplication in Liouville space.
pub fn right_superop(o: &ComplexMatrix) -> ComplexMatrix {
    kron(&Array2::eye(o.nrows()), &o.t().to_owned())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::eval_str;
    use crate::tensor::{max_abs_diff, unvectorize, vectorize};

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn trace_row(d: usize) -> ndarray::Array1<C64> {
        vectorize(&Array2::eye(d))
    }

    #[test]
    fn zero_generator() {
        let sys = SystemLiouvillian::new(2);
        assert!(sys.liouvillian_matrix(0.0).unwrap().iter().all(|x| *x == c(0.0)));
        assert_eq!(sys.step_propagator(0.0, 0.1).unwrap(), Array2::<C64>::eye(4));
    }

    #[test]
    fn commutator_by_hand() {
        let mut sys = SystemLiouvillian::new(2);
        sys.add_hamiltonian(&eval_str("{hbar/2*sigma_x}").unwrap()).unwrap();
        let l = sys.liouvillian_matrix(0.0).unwrap();
        let rho = vectorize(&eval_str("{|0><0|_2}").unwrap());
        let out = unvectorize(&l.dot(&rho), 2);
        // -(i/2)[σx, |0><0|] = (i/2)(|0><1| - |1><0|)
        assert!((out[[0, 1]] - C64::new(0.0, 0.5)).norm() < 1e-14);
        assert!((out[[1, 0]] - C64::new(0.0, -0.5)).norm() < 1e-14);
        assert!(out[[0, 0]].norm() < 1e-14 && out[[1, 1]].norm() < 1e-14);
    }

    #[test]
    fn radiative_decay_rate() {
        let mut sys = SystemLiouvillian::new(2);
        sys.add_lindblad(0.1, eval_str("{|0><1|_2}").unwrap()).unwrap();
        let l = sys.liouvillian_matrix(0.0).unwrap();
        let rho = vectorize(&eval_str("{|1><1|_2}").unwrap());
        let out = l.dot(&rho);
        assert!((out[3] - c(-0.1)).norm() < 1e-15);
        assert!((out[0] - c(0.1)).norm() < 1e-15);
    }

    #[test]
    fn closed_system_matches_hilbert_exponential() {
        let h = eval_str("{0.3*sigma_x + 0.7*sigma_z + 0.2*sigma_y}").unwrap();
        let mut sys = SystemLiouvillian::new(2);
        sys.add_hamiltonian(&h).unwrap();
        let dt = 0.37;
        let m = sys.step_propagator(0.0, dt).unwrap();
        let (w, v) = crate::tensor::eigh_hermitian(&h).unwrap();
        let phases = Array2::from_diag(&w.mapv(|e| C64::from_polar(1.0, -e * dt / HBAR)));
        let u = v.dot(&phases).dot(&dagger(&v));
        let expected = kron(&u, &u.mapv(|x| x.conj()));
        assert!(max_abs_diff(&m, &expected) < 1e-12);
    }

    #[test]
    fn trace_preservation() {
        let mut sys = SystemLiouvillian::new(3);
        sys.add_hamiltonian(&eval_str("{|0><1|_3 + |1><0|_3 + 2*|2><2|_3}").unwrap()).unwrap();
        sys.add_lindblad(0.4, eval_str("{|0><2|_3}").unwrap()).unwrap();
        sys.add_lindblad(1.3, eval_str("{|1><1|_3}").unwrap()).unwrap();
        sys.add_pulse(Envelope::Gauss { t_c: 1.0, fwhm: 1.0, area: 2.0, detuning: 0.3 }, eval_str("{|1><2|_3}").unwrap())
            .unwrap();
        let tr = trace_row(3);
        for &t in &[0.0, 0.8, 1.2] {
            let m = sys.step_propagator(t, 0.05).unwrap();
            let row = m.t().dot(&tr);
            assert!(row.iter().zip(tr.iter()).all(|(a, b)| (a - b).norm() < 1e-12));
        }
    }

    #[test]
    fn choi_positivity_for_lindblad() {
        let mut sys = SystemLiouvillian::new(3);
        sys.add_lindblad(0.7, eval_str("{|0><1|_3 + 0.5*|1><2|_3}").unwrap()).unwrap();
        sys.add_lindblad(0.2, eval_str("{|2><2|_3}").unwrap()).unwrap();
        let d = 3;
        let m = sys.step_propagator(0.0, 0.5).unwrap();
        // Choi[(i,k),(j,l)] = M[(i,j),(k,l)]
        let mut choi = Array2::zeros((d * d, d * d));
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for l in 0..d {
                        choi[[i * d + k, j * d + l]] = m[[i * d + j, k * d + l]];
                    }
                }
            }
        }
        let (w, _) = crate::tensor::eigh_hermitian(&choi).unwrap();
        assert!(w.iter().all(|&x| x > -1e-10), "{w:?}");
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut sys = SystemLiouvillian::new(2);
        sys.add_hamiltonian(&eval_str("{|0><1|_2}").unwrap()).unwrap();
        assert!(matches!(sys.liouvillian_matrix(0.0), Err(SystemError::NonHermitian(_))));
    }

    #[test]
    fn cw_rabi() {
        let mut sys = SystemLiouvillian::new(2);
        sys.add_hamiltonian(&eval_str("{hbar/2*sigma_x}").unwrap()).unwrap();
        let dt = 0.01;
        let m = sys.step_propagator(0.0, dt).unwrap();
        let mut rho = vectorize(&eval_str("{|0><0|_2}").unwrap());
        for k in 1..=500 {
            rho = m.dot(&rho);
            let t = k as f64 * dt;
            assert!((rho[3].re - (t / 2.0).sin().powi(2)).abs() < 1e-12);
        }
    }

    #[test]
    fn superoperators() {
        let o = eval_str("{|0><1|_2 + 2*|1><1|_2}").unwrap();
        let rho = eval_str("{|0><0|_2 + |1><0|_2 + 3*|1><1|_2}").unwrap();
        let left = unvectorize(&left_superop(&o).dot(&vectorize(&rho)), 2);
        let right = unvectorize(&right_superop(&o).dot(&vectorize(&rho)), 2);
        assert!(max_abs_diff(&left, &o.dot(&rho)) < 1e-15);
        assert!(max_abs_diff(&right, &rho.dot(&o)) < 1e-15);
    }
}
