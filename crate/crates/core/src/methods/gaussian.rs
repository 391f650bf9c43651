use std::collections::HashMap;

use ndarray::{Array1, Array2};

use super::spectral::SpectralDensity;
use super::MethodError;
use crate::expr::{HBAR, KB};
use crate::ptmpo::{preselect_combine, product_chain, schmidt_values, select_pairs, BondSelection, Compression, Degeneracy, ProcessTensor};
use crate::quad::{integrate, Quadrature};
use crate::tensor::{kron, Block, Chain};
use crate::{ComplexMatrix, C64};

const ABS_TOL: f64 = 1e-14;
const REL_TOL: f64 = 1e-10;
const MAX_INTERVALS: usize = 20_000;

/// Harmonic bath with linear coupling, described by its spectral density.
#[derive(Debug, Clone)]
pub struct GaussianBath {
    pub j: SpectralDensity,
    /// Kelvin.
    pub temperature: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub subtract_polaron_shift: bool,
}

impl GaussianBath {
    fn coth(&self, omega: f64) -> f64 {
        if self.temperature <= 0.0 {
            return 1.0;
        }
        1.0 / (HBAR * omega / (2.0 * KB * self.temperature)).tanh()
    }

    fn segments(&self) -> Vec<f64> {
        let mut pts = vec![self.omega_min];
        if let SpectralDensity::Table { omega, .. } = &self.j {
            pts.extend(omega.iter().copied().filter(|&w| w > self.omega_min && w < self.omega_max));
        }
        pts.push(self.omega_max);
        pts
    }

    fn integrate(&self, what: &str, f: impl Fn(f64) -> C64) -> Result<C64, MethodError> {
        let pts = self.segments();
        let mut total = C64::new(0.0, 0.0);
        let mut err = 0.0;
        let mut ok = true;
        for w in pts.windows(2) {
            let q: Quadrature = integrate(|x| self.j.eval(x) * f(x), w[0], w[1], ABS_TOL, REL_TOL, MAX_INTERVALS);
            total += q.value;
            err += q.error;
            ok &= q.converged;
        }
        if !ok || !total.re.is_finite() || !total.im.is_finite() {
            return Err(MethodError::Quadrature { what: what.to_string(), achieved: err, requested: ABS_TOL.max(REL_TOL * total.norm()) });
        }
        Ok(total)
    }

    /// `Λ = ∫ J(ω)/ω dω`.
    pub fn polaron_shift(&self) -> Result<f64, MethodError> {
        Ok(self.integrate("polaron shift", |w| C64::new(1.0 / w, 0.0))?.re)
    }
}

/// `C(t) = ∫ J(ω)[coth(ħω/2k_BT) cos ωt − i sin ωt] dω`.
pub fn bath_correlation(bath: &GaussianBath, t: f64) -> Result<C64, MethodError> {
    bath.integrate("bath correlation", |w| C64::new(bath.coth(w) * (w * t).cos(), -(w * t).sin()))
}

/// Discrete memory kernels `η_Δ` for lags `0..n_mem`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianKernel {
    pub eta: Vec<C64>,
    pub dt: f64,
}

fn x_minus_sin(x: f64) -> f64 {
    if x.abs() < 1e-2 {
        let x2 = x * x;
        x * x2 / 6.0 * (1.0 - x2 / 20.0 * (1.0 - x2 / 42.0 * (1.0 - x2 / 72.0)))
    } else {
        x - x.sin()
    }
}

/// Cell-averaged double integrals of `C`: `η₀ = ∫₀^dt ds ∫₀^s ds′ C(s−s′)`,
/// `η_Δ = ∫₀^dt ds ∫₀^dt ds′ C(Δdt + s − s′)`. With polaron-shift
/// subtraction `η₀` gains `iΛdt`.
pub fn gaussian_kernels(bath: &GaussianBath, dt: f64, n_mem: usize) -> Result<GaussianKernel, MethodError> {
    if n_mem == 0 {
        return Err(MethodError::Invalid("memory cut-off must be at least one step".into()));
    }
    let mut eta = Vec::with_capacity(n_mem);
    let mut eta0 = bath.integrate("memory kernel (lag 0)", |w| {
        let x = w * dt;
        let s = (0.5 * x).sin();
        C64::new(bath.coth(w) * 2.0 * s * s, -x_minus_sin(x)) / (w * w)
    })?;
    if bath.subtract_polaron_shift {
        eta0 += C64::new(0.0, bath.polaron_shift()? * dt);
    }
    eta.push(eta0);
    for lag in 1..n_mem {
        let t = lag as f64 * dt;
        let v = bath.integrate(&format!("memory kernel (lag {lag})"), |w| {
            let s = (0.5 * w * dt).sin();
            C64::new(bath.coth(w) * (w * t).cos(), -(w * t).sin()) * (4.0 * s * s / (w * w))
        })?;
        eta.push(v);
    }
    Ok(GaussianKernel { eta, dt })
}

/// Influence weight between the path index at step `j` and at step `k`
/// with lag `j − k`, for coupling eigenvalues `(a_ν, a_μ)` at each step.
pub fn influence_weight(eta: C64, nu_j: f64, mu_j: f64, nu_k: f64, mu_k: f64) -> C64 {
    (-(nu_j - mu_j) * (eta * nu_k - eta.conj() * mu_k)).exp()
}

/// Memory range of the factor originating at step `k`.
fn factor_end(k: usize, n_mem: usize, n: usize) -> usize {
    (k + n_mem - 1).min(n - 1)
}

struct Factors {
    eta: Vec<C64>,
    /// `(a_ν, a_μ)` per outer index `α = ν·g + μ`.
    pairs: Vec<(f64, f64)>,
    /// Distinct pairs; the factor bonds only need to carry these.
    classes: Vec<(f64, f64)>,
    class_of: Vec<usize>,
}

impl Factors {
    fn new(a: &[f64], eta: &[C64]) -> Self {
        let pairs: Vec<(f64, f64)> = a.iter().flat_map(|&x| a.iter().map(move |&y| (x, y))).collect();
        let mut classes: Vec<(f64, f64)> = Vec::new();
        let class_of = pairs
            .iter()
            .map(|&p| match classes.iter().position(|&c| c == p) {
                Some(i) => i,
                None => {
                    classes.push(p);
                    classes.len() - 1
                }
            })
            .collect();
        Factors { eta: eta.to_vec(), pairs, classes, class_of }
    }

    fn groups(&self) -> usize {
        (self.pairs.len() as f64).sqrt().round() as usize
    }

    fn weight(&self, alpha_j: usize, class_k: usize, lag: usize) -> C64 {
        let (nj, mj) = self.pairs[alpha_j];
        let (nk, mk) = self.classes[class_k];
        influence_weight(self.eta[lag], nj, mj, nk, mk)
    }

    /// Matrix of the factor `F_k` at site `k + lag` for outer index `alpha`.
    fn site(&self, alpha: usize, lag: usize, is_end: bool) -> ComplexMatrix {
        let nc = self.classes.len();
        let own = self.class_of[alpha];
        match (lag, is_end) {
            (0, true) => Array2::from_elem((1, 1), self.weight(alpha, own, 0)),
            (0, false) => {
                let mut m = Array2::zeros((nc, 1));
                m[[own, 0]] = self.weight(alpha, own, 0);
                m
            }
            (_, false) => Array2::from_diag(&Array1::from_shape_fn(nc, |c| self.weight(alpha, c, lag))),
            (_, true) => Array2::from_shape_fn((1, nc), |(_, c)| self.weight(alpha, c, lag)),
        }
    }
}

/// Multiplies `F_k` into the diagonal PT chain in place.
fn apply_factor(chain: &mut Chain, f: &Factors, k: usize, end: usize) {
    let na = f.pairs.len();
    let nc = f.classes.len();
    for site in k..=end {
        let lag = site - k;
        let is_end = site == end;
        let b = &chain.blocks[site];
        let mut nb = Block::new(0, 0);
        for (&beta, &e) in &b.map {
            let alpha = beta as usize / na;
            let m = kron(&b.mats[e], &f.site(alpha, lag, is_end));
            nb.dim_in = m.ncols();
            nb.dim_out = m.nrows();
            let idx = nb.push_matrix(m);
            nb.map.insert(beta, idx);
        }
        let in_f = if lag == 0 { 1 } else { nc };
        let out_f = if is_end { 1 } else { nc };
        nb.dim_in = b.dim_in * in_f;
        nb.dim_out = b.dim_out * out_f;
        nb.dedup();
        chain.blocks[site] = nb;
        if !is_end {
            let q = &chain.closures[site];
            chain.closures[site] = Array1::from_iter(q.iter().flat_map(|&x| std::iter::repeat(x).take(nc)));
        }
    }
}

fn check_grid(n: usize, kernel: &GaussianKernel) -> Result<usize, MethodError> {
    if n == 0 {
        return Err(MethodError::Invalid("process tensor needs at least one step".into()));
    }
    if kernel.eta.is_empty() {
        return Err(MethodError::Invalid("empty memory kernel".into()));
    }
    Ok(kernel.eta.len())
}

/// PT on the group space of a diagonal coupling with eigenvalues `a`,
/// built factor by factor with local sweeps.
pub fn gaussian_jp(a: &[f64], kernel: &GaussianKernel, n: usize, c: &Compression) -> Result<ProcessTensor, MethodError> {
    let n_mem = check_grid(n, kernel)?;
    let g = a.len();
    let f = Factors::new(a, &kernel.eta);
    let mut chain = Chain::trivial(g, n);
    for k in (0..n).rev() {
        let end = factor_end(k, n_mem, n);
        apply_factor(&mut chain, &f, k, end);
        chain.forward_sweep(k, end + 1, c.forward())?;
        chain.backward_sweep(k, end + 1, c.backward())?;
    }
    Ok(ProcessTensor::new(g, kernel.dt, chain)?)
}

/// Shifts a PT by `m` steps: `m` identity blocks in front, the tail cut by
/// contracting with the closure.
fn shift(pt: &ProcessTensor, m: usize) -> ProcessTensor {
    let n = pt.len();
    let mut blocks = vec![Block::identity(pt.dim); m.min(n)];
    let mut closures = vec![Array1::from_elem(1, C64::new(1.0, 0.0)); m.min(n)];
    if m < n {
        let keep = n - m;
        blocks.extend_from_slice(&pt.chain.blocks[..keep]);
        closures.extend_from_slice(&pt.chain.closures[..keep]);
        let q = pt.chain.closures[keep - 1].clone().insert_axis(ndarray::Axis(0));
        let last = blocks.last_mut().expect("keep > 0");
        last.map_mats(|mat| q.dot(mat));
        last.dim_out = 1;
        last.compact();
        *closures.last_mut().expect("keep > 0") = Array1::from_elem(1, C64::new(1.0, 0.0));
    }
    ProcessTensor { dim: pt.dim, dt: pt.dt, chain: Chain { blocks, closures }, repeat_from: None }
}

/// PT containing the factors originating in steps `0..len` on a horizon of
/// `n` steps, by recursive halving.
fn dnc_prefix(
    f: &Factors,
    n: usize,
    n_mem: usize,
    len: usize,
    c: &Compression,
    dt: f64,
    memo: &mut HashMap<usize, ProcessTensor>,
) -> Result<ProcessTensor, MethodError> {
    if let Some(pt) = memo.get(&len) {
        return Ok(pt.clone());
    }
    let g = f.groups();
    let pt = if len == 1 {
        let mut chain = Chain::trivial(g, n);
        let end = factor_end(0, n_mem, n);
        apply_factor(&mut chain, f, 0, end);
        chain.forward_sweep(0, end + 1, c.forward())?;
        chain.backward_sweep(0, end + 1, c.backward())?;
        ProcessTensor::new(g, dt, chain)?
    } else {
        let b = len / 2;
        let a = len - b;
        let left = dnc_prefix(f, n, n_mem, a, c, dt, memo)?;
        let right = dnc_prefix(f, n, n_mem, b, c, dt, memo)?;
        preselect_combine(&left, &shift(&right, a), c)?
    };
    memo.insert(len, pt.clone());
    Ok(pt)
}

/// Divide-and-conquer construction of the same PT as [`gaussian_jp`].
pub fn gaussian_dnc(a: &[f64], kernel: &GaussianKernel, n: usize, c: &Compression) -> Result<ProcessTensor, MethodError> {
    let n_mem = check_grid(n, kernel)?;
    let f = Factors::new(a, &kernel.eta);
    let mut memo = HashMap::new();
    dnc_prefix(&f, n, n_mem, n, c, kernel.dt, &mut memo)
}

/// Periodic PT for a memory cut-off of `n_mem` steps (a power of two): a
/// lead-in of `n_mem` blocks followed by a repeating block of `n_mem`.
pub fn gaussian_periodic(a: &[f64], kernel: &GaussianKernel, c: &Compression) -> Result<ProcessTensor, MethodError> {
    let n_mem = kernel.eta.len();
    if n_mem == 0 || !n_mem.is_power_of_two() {
        return Err(MethodError::NotPowerOfTwo(n_mem));
    }
    let g = a.len();
    let f = Factors::new(a, &kernel.eta);
    let mut memo = HashMap::new();
    let cell = dnc_prefix(&f, 2 * n_mem, n_mem, n_mem, c, kernel.dt, &mut memo)?;
    let (canon, sv) = schmidt_values(&cell.chain, c.select())?;
    let old = Chain { blocks: canon.blocks[n_mem..].to_vec(), closures: canon.closures[n_mem..].to_vec() };
    let new = Chain { blocks: canon.blocks[..n_mem].to_vec(), closures: canon.closures[..n_mem].to_vec() };
    let mut sel: BondSelection = vec![None; n_mem + 1];
    for (i, s) in sel.iter_mut().enumerate().take(n_mem).skip(1) {
        *s = select_pairs(&sv[i + n_mem], &sv[i], c.select());
    }
    let mut period = product_chain(&old, &new, g, Some(&sel))?;
    period.forward_sweep(0, n_mem, c.forward())?;
    period.backward_sweep(0, n_mem, c.backward())?;
    let mut blocks = new.blocks;
    let mut closures = new.closures;
    blocks.extend(period.blocks);
    closures.extend(period.closures);
    let mut pt = ProcessTensor::new(g, kernel.dt, Chain::new(blocks, closures)?)?;
    pt.repeat_from = Some(n_mem);
    Ok(pt)
}

/// Construction scheme for Gaussian baths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianMethod {
    Jp,
    DivideAndConquer,
    Periodic,
}

/// Builds the PT for coupling operator `sys_op` on the full system space,
/// generating on degenerate eigenvalue groups when `reduce` is set.
pub fn gaussian_pt(
    sys_op: &ComplexMatrix,
    kernel: &GaussianKernel,
    n: usize,
    c: &Compression,
    method: GaussianMethod,
    reduce: bool,
) -> Result<ProcessTensor, MethodError> {
    let deg = Degeneracy::new(sys_op, reduce)?;
    let pt = match method {
        GaussianMethod::Jp => gaussian_jp(&deg.values, kernel, n, c)?,
        GaussianMethod::DivideAndConquer => gaussian_dnc(&deg.values, kernel, n, c)?,
        GaussianMethod::Periodic => gaussian_periodic(&deg.values, kernel, c)?,
    };
    Ok(deg.expand(&pt)?)
}
