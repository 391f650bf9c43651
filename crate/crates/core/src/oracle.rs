//! Brute-force and closed-form references.
//!
//! Nothing here touches process tensors: the dense propagator works on the
//! full system-environment density matrix, the path sum enumerates every
//! Liouville path, and the independent-boson coherence is a single integral.

use ndarray::{Array2, Array4};

use crate::expr::{HBAR, KB};
use crate::propagate::TrotterOrder;
use crate::quad::integrate;
use crate::system::{SystemError, SystemLiouvillian};
use crate::tensor::{dagger, expm, TensorError};
use crate::{ComplexMatrix, C64};

/// Largest full Liouville dimension handled by [`dense_propagate`].
pub const DENSE_LIMIT: usize = 4096;
/// Largest number of steps handled by [`path_sum`].
pub const PATH_SUM_STEPS: usize = 8;

#[derive(Debug, thiserror::Error)]
pub enum OracleError {
    #[error("oracle size guard: {0}")]
    TooLarge(String),
    #[error("{0}")]
    Invalid(String),
    #[error("quadrature did not converge (error {0:.3e})")]
    Quadrature(f64),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

/// An explicit environment mode: Hamiltonian on `system ⊗ mode` and the
/// initial mode state.
#[derive(Debug, Clone)]
pub struct DenseMode {
    pub hamiltonian: ComplexMatrix,
    pub rho: ComplexMatrix,
}

/// How the environment propagator of one step is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvSplitting {
    /// `exp(−iΣ_k H_k dt/ħ)`.
    Joint,
    /// `U_0·U_1·…·U_{N−1}`, mode `N−1` acting first.
    PerMode,
}

#[derive(Debug, Clone)]
pub struct DenseSetup {
    pub system: SystemLiouvillian,
    pub rho0: ComplexMatrix,
    pub modes: Vec<DenseMode>,
    pub ta: f64,
    pub dt: f64,
    pub n: usize,
    pub order: TrotterOrder,
    pub splitting: EnvSplitting,
}

/// Embeds an operator on `system ⊗ mode k` into `system ⊗ mode_0 ⊗ …`.
fn embed(op: &ComplexMatrix, d: usize, dims: &[usize], k: usize) -> ComplexMatrix {
    let before: usize = dims[..k].iter().product();
    let m = dims[k];
    let after: usize = dims[k + 1..].iter().product();
    let n = d * before * m * after;
    let mut out = Array2::zeros((n, n));
    let split = |i: usize| {
        let a = i % after;
        let e = (i / after) % m;
        let b = (i / (after * m)) % before;
        let s = i / (after * m * before);
        (s, b, e, a)
    };
    for i in 0..n {
        let (s, b, e, a) = split(i);
        for sp in 0..d {
            for ep in 0..m {
                let v = op[[s * m + e, sp * m + ep]];
                if v != C64::new(0.0, 0.0) {
                    let j = ((sp * before + b) * m + ep) * after + a;
                    out[[i, j]] = v;
                }
            }
        }
    }
    out
}

fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    Array2::from_shape_fn((ra * rb, ca * cb), |(i, j)| a[[i / rb, j / cb]] * b[[i % rb, j % cb]])
}

/// Applies a system superoperator to the system indices of a full density
/// matrix of shape `(D·E) × (D·E)`.
fn apply_system(m: &ComplexMatrix, rho: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let e = rho.nrows() / d;
    let r = Array4::from_shape_fn((d, e, d, e), |(s, x, sp, y)| rho[[s * e + x, sp * e + y]]);
    let mut out = Array2::zeros(rho.dim());
    for s in 0..d {
        for sp in 0..d {
            let alpha = s * d + sp;
            for t in 0..d {
                for tp in 0..d {
                    let w = m[[alpha, t * d + tp]];
                    if w == C64::new(0.0, 0.0) {
                        continue;
                    }
                    for x in 0..e {
                        for y in 0..e {
                            out[[s * e + x, sp * e + y]] += w * r[[t, x, tp, y]];
                        }
                    }
                }
            }
        }
    }
    out
}

fn partial_trace_env(rho: &ComplexMatrix, d: usize) -> ComplexMatrix {
    let e = rho.nrows() / d;
    Array2::from_shape_fn((d, d), |(s, sp)| (0..e).map(|x| rho[[s * e + x, sp * e + x]]).sum())
}

fn unitary(h: &ComplexMatrix, dt: f64) -> Result<ComplexMatrix, TensorError> {
    expm(&h.mapv(|x| x * C64::new(0.0, -dt / HBAR)))
}

/// Reduced density matrices at every grid point, obtained by propagating the
/// full system-environment state and tracing out the modes.
pub fn dense_propagate(setup: &DenseSetup) -> Result<Vec<ComplexMatrix>, OracleError> {
    let d = setup.system.dim;
    let dims: Vec<usize> = setup.modes.iter().map(|m| m.rho.nrows()).collect();
    let env: usize = dims.iter().product();
    let full = d * env;
    if full * full > DENSE_LIMIT {
        return Err(OracleError::TooLarge(format!("Liouville dimension {} exceeds {DENSE_LIMIT}", full * full)));
    }
    for (k, m) in setup.modes.iter().enumerate() {
        if m.hamiltonian.dim() != (d * dims[k], d * dims[k]) {
            return Err(OracleError::Invalid(format!("mode {k} Hamiltonian has shape {:?}", m.hamiltonian.dim())));
        }
    }
    let mut rho = setup.rho0.clone();
    for m in &setup.modes {
        rho = kron(&rho, &m.rho);
    }
    let embedded: Vec<ComplexMatrix> = setup.modes.iter().enumerate().map(|(k, m)| embed(&m.hamiltonian, d, &dims, k)).collect();
    let u_env = match setup.splitting {
        EnvSplitting::Joint => {
            let h = embedded.iter().fold(Array2::zeros((full, full)), |acc: ComplexMatrix, h| acc + h);
            unitary(&h, setup.dt)?
        }
        EnvSplitting::PerMode => {
            let mut u: ComplexMatrix = Array2::eye(full);
            for h in &embedded {
                u = u.dot(&unitary(h, setup.dt)?);
            }
            u
        }
    };
    let env_step = |rho: &ComplexMatrix, u: &ComplexMatrix| u.dot(rho).dot(&dagger(u));
    let sys = &setup.system;
    let mut out = Vec::with_capacity(setup.n + 1);
    out.push(partial_trace_env(&rho, d));
    for l in 0..setup.n {
        let t = setup.ta + l as f64 * setup.dt;
        rho = match setup.order {
            TrotterOrder::Symmetric => {
                let r = apply_system(&sys.step_propagator(t, 0.5 * setup.dt)?, &rho, d);
                let r = env_step(&r, &u_env);
                apply_system(&sys.step_propagator(t + 0.5 * setup.dt, 0.5 * setup.dt)?, &r, d)
            }
            TrotterOrder::Asymmetric => env_step(&apply_system(&sys.step_propagator(t, setup.dt)?, &rho, d), &u_env),
            TrotterOrder::Alternate if l % 2 == 0 => env_step(&apply_system(&sys.step_propagator(t, setup.dt)?, &rho, d), &u_env),
            TrotterOrder::Alternate => apply_system(&sys.step_propagator(t, setup.dt)?, &env_step(&rho, &u_env), d),
        };
        out.push(partial_trace_env(&rho, d));
    }
    Ok(out)
}

/// Reduced density matrices at steps `0..=n` from the explicit sum over all
/// Liouville paths weighted by the discretized Gaussian influence
/// functional. The system basis must diagonalize the coupling, with
/// eigenvalues `a`; lags beyond `eta.len() − 1` carry no weight.
pub fn path_sum(
    system: &SystemLiouvillian,
    rho0: &ComplexMatrix,
    a: &[f64],
    eta: &[C64],
    ta: f64,
    dt: f64,
    n: usize,
    order: TrotterOrder,
) -> Result<Vec<ComplexMatrix>, OracleError> {
    let d = system.dim;
    if n > PATH_SUM_STEPS || (d * d).checked_pow(n as u32).is_none_or(|p| p > 65536) {
        return Err(OracleError::TooLarge(format!("{}^{n} paths", d * d)));
    }
    if a.len() != d {
        return Err(OracleError::Invalid(format!("{} coupling eigenvalues for dimension {d}", a.len())));
    }
    let d2 = d * d;
    let id: ComplexMatrix = Array2::eye(d2);
    let mut steps = Vec::with_capacity(n);
    for l in 0..n {
        let t = ta + l as f64 * dt;
        steps.push(match order {
            TrotterOrder::Symmetric => (system.step_propagator(t, 0.5 * dt)?, system.step_propagator(t + 0.5 * dt, 0.5 * dt)?),
            TrotterOrder::Asymmetric => (system.step_propagator(t, dt)?, id.clone()),
            TrotterOrder::Alternate if l % 2 == 0 => (system.step_propagator(t, dt)?, id.clone()),
            TrotterOrder::Alternate => (id.clone(), system.step_propagator(t, dt)?),
        });
    }
    let weight = |aj: usize, ak: usize, lag: usize| -> C64 {
        let (nj, mj) = (a[aj / d], a[aj % d]);
        let (nk, mk) = (a[ak / d], a[ak % d]);
        let e = eta[lag];
        (-(nj - mj) * (e * nk - e.conj() * mk)).exp()
    };
    let mut acc = vec![vec![C64::new(0.0, 0.0); d2]; n + 1];
    let v0: Vec<C64> = rho0.iter().copied().collect();
    acc[0] = v0.clone();
    let mut path = Vec::with_capacity(n);

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        l: usize,
        v: &[C64],
        infl: C64,
        path: &mut Vec<usize>,
        steps: &[(ComplexMatrix, ComplexMatrix)],
        weight: &dyn Fn(usize, usize, usize) -> C64,
        n_mem: usize,
        acc: &mut [Vec<C64>],
    ) {
        if l == steps.len() {
            return;
        }
        let d2 = v.len();
        let (m1, m2) = &steps[l];
        for alpha in 0..d2 {
            let x: C64 = (0..d2).map(|b| m1[[alpha, b]] * v[b]).sum();
            let mut w = infl;
            for (k, &ak) in path.iter().enumerate() {
                let lag = l - k;
                if lag < n_mem {
                    w *= weight(alpha, ak, lag);
                }
            }
            w *= weight(alpha, alpha, 0);
            let next: Vec<C64> = (0..d2).map(|r| m2[[r, alpha]] * x).collect();
            for (r, val) in next.iter().enumerate() {
                acc[l + 1][r] += w * val;
            }
            path.push(alpha);
            recurse(l + 1, &next, w, path, steps, weight, n_mem, acc);
            path.pop();
        }
    }

    recurse(0, &v0, C64::new(1.0, 0.0), &mut path, &steps, &weight, eta.len(), &mut acc);
    Ok(acc.into_iter().map(|v| Array2::from_shape_vec((d, d), v).expect("d² entries")).collect())
}

/// `2ρ₁₀(t)` for an initially equal superposition, `H_S = 0` and coupling
/// `Â = |1⟩⟨1|`:
/// `exp(∫ J/ω² [(cos ωt − 1) coth(ħω/2k_BT) − i sin ωt] dω)`, with the
/// polaron shift subtracted. Without subtraction the phase gains `+Λt`,
/// `Λ = ∫ J/ω dω`.
pub fn independent_boson_coherence(
    j: &dyn Fn(f64) -> f64,
    temperature: f64,
    omega_min: f64,
    omega_max: f64,
    t: f64,
    subtract_polaron_shift: bool,
) -> Result<C64, OracleError> {
    let coth = |w: f64| if temperature <= 0.0 { 1.0 } else { 1.0 / (HBAR * w / (2.0 * KB * temperature)).tanh() };
    let q = integrate(
        |w| {
            let s = (0.5 * w * t).sin();
            let phase = if subtract_polaron_shift { -(w * t).sin() } else { w * t - (w * t).sin() };
            C64::new(-2.0 * s * s * coth(w), phase) * (j(w) / (w * w))
        },
        omega_min,
        omega_max,
        1e-13,
        1e-11,
        20_000,
    );
    if !q.converged {
        return Err(OracleError::Quadrature(q.error));
    }
    Ok(q.value.exp())
}

/// `⟨σ_x(t)⟩` of the independent-boson model, see
/// [`independent_boson_coherence`].
pub fn independent_boson_exact(
    j: &dyn Fn(f64) -> f64,
    temperature: f64,
    omega_min: f64,
    omega_max: f64,
    t: f64,
) -> Result<f64, OracleError> {
    Ok(independent_boson_coherence(j, temperature, omega_min, omega_max, t, true)?.re)
}
