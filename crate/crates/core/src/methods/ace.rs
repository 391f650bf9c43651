use ndarray::{Array1, Array2};

use super::MethodError;
use crate::ptmpo::{preselect_combine, stack, Compression, ProcessTensor};
use crate::system::SystemLiouvillian;
use crate::tensor::{eigh_hermitian, is_hermitian, vectorize, Block, Chain};
use crate::{ComplexMatrix, C64};

/// One environment mode: a generator on `system ⊗ mode` and the initial
/// mode state.
#[derive(Debug, Clone)]
pub struct SingleModeSpec {
    pub sys_dim: usize,
    pub generator: SystemLiouvillian,
    pub rho_env: ComplexMatrix,
    /// Superoperators on `system ⊗ mode` applied after the step ending
    /// nearest to the given time.
    pub insertions: Vec<(f64, ComplexMatrix)>,
}

impl SingleModeSpec {
    pub fn new(sys_dim: usize, generator: SystemLiouvillian, rho_env: ComplexMatrix) -> Result<Self, MethodError> {
        let m = rho_env.nrows();
        if !rho_env.is_square() || generator.dim != sys_dim * m {
            return Err(MethodError::Invalid(format!(
                "mode generator has dimension {}, expected {} x {}",
                generator.dim, sys_dim, m
            )));
        }
        let tr: C64 = rho_env.diag().sum();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-10 || !is_hermitian(&rho_env, 1e-10) {
            return Err(MethodError::InvalidState("initial mode state must be Hermitian with unit trace".into()));
        }
        let (w, _) = eigh_hermitian(&rho_env).map_err(|e| MethodError::InvalidState(e.to_string()))?;
        if w.iter().any(|&x| x < -1e-10) {
            return Err(MethodError::InvalidState("initial mode state is not positive semidefinite".into()));
        }
        Ok(SingleModeSpec { sys_dim, generator, rho_env, insertions: Vec::new() })
    }

    /// Mode defined by a Hamiltonian on `system ⊗ mode` (meV).
    pub fn from_hamiltonian(sys_dim: usize, h: &ComplexMatrix, rho_env: ComplexMatrix) -> Result<Self, MethodError> {
        let mut gen = SystemLiouvillian::new(h.nrows());
        gen.add_hamiltonian(h)?;
        SingleModeSpec::new(sys_dim, gen, rho_env)
    }

    pub fn mode_dim(&self) -> usize {
        self.rho_env.nrows()
    }
}

/// Time grid of a PT: `n` steps of `dt` starting at `ta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub ta: f64,
    pub dt: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(ta: f64, te: f64, dt: f64) -> Result<Self, MethodError> {
        if dt <= 0.0 || !dt.is_finite() {
            return Err(MethodError::Invalid(format!("time step must be positive, got {dt}")));
        }
        let steps = ((te - ta) / dt).round();
        if steps < 0.0 {
            return Err(MethodError::Invalid(format!("te ({te}) before ta ({ta})")));
        }
        Ok(Grid { ta, dt, n: steps as usize })
    }
}

/// Exact PT of a single mode: the blocks are the mode-system propagators
/// with the environment indices on the inner bonds.
pub fn pt_from_single_mode(spec: &SingleModeSpec, grid: &Grid) -> Result<ProcessTensor, MethodError> {
    let (d, m) = (spec.sys_dim, spec.mode_dim());
    let (d2, m2) = (d * d, m * m);
    let dm = d * m;
    let idx = |s: usize, sp: usize, e: usize, ep: usize| (s * m + e) * dm + sp * m + ep;
    let rho = vectorize(&spec.rho_env);
    let tr = vectorize(&Array2::eye(m));
    let cached = if spec.generator.is_time_dependent() { None } else { Some(spec.generator.step_propagator(grid.ta, grid.dt)?) };
    let mut blocks = Vec::with_capacity(grid.n);
    let mut closures = Vec::with_capacity(grid.n);
    for l in 0..grid.n {
        let mut prop = match &cached {
            Some(p) => p.clone(),
            None => spec.generator.step_propagator(grid.ta + l as f64 * grid.dt, grid.dt)?,
        };
        for (t, op) in &spec.insertions {
            if ((t - grid.ta) / grid.dt + 0.5).floor() as i64 == l as i64 + 1 {
                prop = op.dot(&prop);
            }
        }
        let cut = 1e-14 * prop.iter().fold(0.0f64, |a, x| a.max(x.norm()));
        let first = l == 0;
        let last = l + 1 == grid.n;
        let (din, dout) = (if first { 1 } else { m2 }, if last { 1 } else { m2 });
        let mut block = Block::new(din, dout);
        for a in 0..d2 {
            let (s, sp) = (a / d, a % d);
            for ain in 0..d2 {
                let (si, sip) = (ain / d, ain % d);
                let mut q: ComplexMatrix = Array2::zeros((m2, m2));
                let mut any = false;
                for xi in 0..m2 {
                    for xin in 0..m2 {
                        let v = prop[[idx(s, sp, xi / m, xi % m), idx(si, sip, xin / m, xin % m)]];
                        if v.norm() >= cut && v.norm() > 0.0 {
                            q[[xi, xin]] = v;
                            any = true;
                        }
                    }
                }
                if !any {
                    continue;
                }
                let mut q = if first { q.dot(&rho).insert_axis(ndarray::Axis(1)) } else { q };
                if last {
                    q = tr.dot(&q).insert_axis(ndarray::Axis(0));
                }
                block.insert((a * d2 + ain) as u32, q);
            }
        }
        block.dedup();
        blocks.push(block);
        closures.push(if last { Array1::from_elem(1, C64::new(1.0, 0.0)) } else { tr.clone() });
    }
    let chain = Chain::new(blocks, closures)?;
    Ok(ProcessTensor::new(d, grid.dt, chain)?)
}

/// Threshold settings for PT generation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Schedule {
    pub compression: Compression,
    /// Range factor `r ≥ 1`: early combinations use `ε/r`.
    pub range_factor: f64,
    pub final_sweeps: usize,
    pub final_threshold: Option<f64>,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule { compression: Compression::default(), range_factor: 1.0, final_sweeps: 0, final_threshold: None }
    }
}

impl Schedule {
    pub fn new(threshold: f64) -> Self {
        Schedule { compression: Compression::new(threshold), ..Default::default() }
    }

    /// Threshold for step `k` of `total`, interpolating `log ε` linearly from
    /// `ε/r` to `ε`.
    pub fn at(&self, k: usize, total: usize) -> Compression {
        let eps = self.compression.threshold;
        let frac = if total <= 1 { 1.0 } else { k as f64 / (total - 1) as f64 };
        let r = self.range_factor.max(1.0);
        self.compression.with_threshold(eps * r.powf(-(1.0 - frac)))
    }

    pub fn finish(&self, pt: &mut ProcessTensor) -> Result<(), MethodError> {
        let c = self.compression.with_threshold(self.final_threshold.unwrap_or(self.compression.threshold));
        for _ in 0..self.final_sweeps {
            pt.sweep(&c)?;
        }
        Ok(())
    }
}

fn leaves(modes: &[SingleModeSpec], grid: &Grid, first: &Compression) -> Result<Vec<ProcessTensor>, MethodError> {
    modes
        .iter()
        .map(|spec| {
            let mut pt = pt_from_single_mode(spec, grid)?;
            pt.sweep(first)?;
            Ok(pt)
        })
        .collect()
}

/// Combines mode PTs one after the other, compressing after each step.
pub fn ace_sequential(modes: &[SingleModeSpec], grid: &Grid, schedule: &Schedule) -> Result<ProcessTensor, MethodError> {
    if modes.is_empty() {
        return Err(MethodError::Invalid("no environment modes".into()));
    }
    let combos = modes.len() - 1;
    let mut pts = leaves(modes, grid, &schedule.at(0, combos))?.into_iter();
    let mut acc = pts.next().expect("non-empty");
    for (c, pt) in pts.enumerate() {
        acc = stack(&acc, &pt, &schedule.at(c, combos))?;
        log::debug!("combined mode {} of {}: max bond {}", c + 2, modes.len(), acc.max_bond());
    }
    schedule.finish(&mut acc)?;
    Ok(acc)
}

/// Combines neighbouring mode PTs pairwise, level by level, with
/// preselection.
pub fn ace_tree(modes: &[SingleModeSpec], grid: &Grid, schedule: &Schedule) -> Result<ProcessTensor, MethodError> {
    if modes.is_empty() {
        return Err(MethodError::Invalid("no environment modes".into()));
    }
    let levels = (modes.len() as f64).log2().ceil() as usize;
    let mut layer = leaves(modes, grid, &schedule.at(0, levels))?;
    let mut level = 0;
    while layer.len() > 1 {
        let c = schedule.at(level, levels);
        let mut next = Vec::with_capacity(layer.len().div_ceil(2));
        let mut it = layer.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(preselect_combine(&a, &b, &c)?),
                None => next.push(a),
            }
        }
        log::debug!("tree level {level}: {} PTs, max bond {}", next.len(), next.iter().map(|p| p.max_bond()).max().unwrap_or(1));
        layer = next;
        level += 1;
    }
    let mut pt = layer.pop().expect("non-empty");
    schedule.finish(&mut pt)?;
    Ok(pt)
}
