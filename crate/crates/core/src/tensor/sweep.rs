use ndarray::{s, Array1, Array2};

use super::{svd_truncate, Block, TensorError};
use crate::{ComplexMatrix, C64};

/// Relative singular-value floor applied in every sweep, so that an exact
/// (`ε = 0`) sweep still drops numerically vanishing directions.
pub const RANK_FLOOR: f64 = 1e-16;

/// A sequence of MPO blocks together with the closure vector after each block.
///
/// `closures[l]` lives on the outgoing bond of `blocks[l]`; contracting the
/// state after step `l` with it traces out the environment.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub blocks: Vec<Block>,
    pub closures: Vec<Array1<C64>>,
}

impl Chain {
    pub fn new(blocks: Vec<Block>, closures: Vec<Array1<C64>>) -> Result<Self, TensorError> {
        let c = Chain { blocks, closures };
        c.validate()?;
        Ok(c)
    }

    /// Chain of identity blocks with unit closures.
    pub fn trivial(dim: usize, n: usize) -> Self {
        Chain {
            blocks: vec![Block::identity(dim); n],
            closures: vec![Array1::from_elem(1, C64::new(1.0, 0.0)); n],
        }
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn validate(&self) -> Result<(), TensorError> {
        for (l, b) in self.blocks.iter().enumerate() {
            b.check_shapes(l)?;
            if l + 1 < self.blocks.len() && self.blocks[l + 1].dim_in != b.dim_out {
                return Err(TensorError::BondMismatch {
                    index: l + 1,
                    expected: b.dim_out,
                    found: self.blocks[l + 1].dim_in,
                });
            }
            match self.closures.get(l) {
                Some(q) if q.len() == b.dim_out => {}
                Some(q) => {
                    return Err(TensorError::ClosureMismatch { index: l, expected: b.dim_out, found: q.len() })
                }
                None => return Err(TensorError::ClosureMismatch { index: l, expected: b.dim_out, found: 0 }),
            }
        }
        Ok(())
    }

    /// Inner bond dimensions, `n + 1` entries from the left edge to the right edge.
    pub fn bond_dims(&self) -> Vec<usize> {
        let mut dims = Vec::with_capacity(self.blocks.len() + 1);
        dims.push(self.blocks.first().map_or(1, |b| b.dim_in));
        dims.extend(self.blocks.iter().map(|b| b.dim_out));
        dims
    }

    pub fn max_bond(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// Left-to-right sweep over `blocks[lo..hi]`, leaving the bonds at `lo`
    /// and `hi` untouched. Returns the retained singular values per bond
    /// (indexed by bond, empty where untouched).
    pub fn forward_sweep(&mut self, lo: usize, hi: usize, eps: f64) -> Result<Vec<Vec<f64>>, TensorError> {
        let mut sv = vec![Vec::new(); self.blocks.len() + 1];
        for l in lo..hi.saturating_sub(1) {
            sv[l + 1] = self.forward_step(l, eps)?;
        }
        Ok(sv)
    }

    /// Right-to-left sweep over `blocks[lo..hi]` with fixed boundary bonds.
    pub fn backward_sweep(&mut self, lo: usize, hi: usize, eps: f64) -> Result<Vec<Vec<f64>>, TensorError> {
        let mut sv = vec![Vec::new(); self.blocks.len() + 1];
        for l in (lo + 1..hi).rev() {
            sv[l] = self.backward_step(l, eps)?;
        }
        Ok(sv)
    }

    /// Forward then backward sweep over the whole chain.
    pub fn sweep_pair(&mut self, eps_forward: f64, eps_backward: f64) -> Result<(), TensorError> {
        let n = self.blocks.len();
        self.forward_sweep(0, n, eps_forward)?;
        self.backward_sweep(0, n, eps_backward)?;
        Ok(())
    }

    fn forward_step(&mut self, l: usize, eps: f64) -> Result<Vec<f64>, TensorError> {
        let block = &self.blocks[l];
        let used = block.used_mats();
        let (din, dout) = (block.dim_in, block.dim_out);
        let mut a = Array2::zeros((used.len() * din, dout));
        for (k, &i) in used.iter().enumerate() {
            a.slice_mut(s![k * din..(k + 1) * din, ..]).assign(&block.mats[i].t());
        }
        let (u, sigma, vt) = factor(&a, eps)?;
        let r = sigma.len();
        // The leading singular value stays with this block so that the
        // chain norm is not accumulated along the sweep.
        let s0 = scale_of(&sigma);
        let block = &mut self.blocks[l];
        for (k, &i) in used.iter().enumerate() {
            block.mats[i] = u.slice(s![k * din..(k + 1) * din, ..]).t().mapv(|x| x * s0);
        }
        block.dim_out = r;
        block.compact();
        let mut sv = vt;
        for (k, x) in sigma.iter().enumerate() {
            sv.row_mut(k).mapv_inplace(|v| v * (x / s0));
        }
        self.closures[l] = sv.dot(&self.closures[l]);
        let svt = sv.t();
        let next = &mut self.blocks[l + 1];
        next.map_mats(|m| m.dot(&svt));
        next.dim_in = r;
        next.compact();
        Ok(sigma)
    }

    fn backward_step(&mut self, l: usize, eps: f64) -> Result<Vec<f64>, TensorError> {
        let block = &self.blocks[l];
        let used = block.used_mats();
        let (din, dout) = (block.dim_in, block.dim_out);
        let mut c = Array2::zeros((din, used.len() * dout));
        for (k, &i) in used.iter().enumerate() {
            c.slice_mut(s![.., k * dout..(k + 1) * dout]).assign(&block.mats[i].t());
        }
        let (u, sigma, vt) = factor(&c, eps)?;
        let r = sigma.len();
        let s0 = scale_of(&sigma);
        let block = &mut self.blocks[l];
        for (k, &i) in used.iter().enumerate() {
            block.mats[i] = vt.slice(s![.., k * dout..(k + 1) * dout]).t().mapv(|x| x * s0);
        }
        block.dim_in = r;
        block.compact();
        // Closure in the new bond basis: diag(s0/σ)·U†·q.
        let q = &self.closures[l - 1];
        self.closures[l - 1] = Array1::from_shape_fn(r, |k| {
            let x: C64 = (0..din).map(|i| q[i] * u[[i, k]].conj()).sum();
            if sigma[k] > 0.0 { x * (s0 / sigma[k]) } else { C64::new(0.0, 0.0) }
        });
        let mut us = u;
        for (k, x) in sigma.iter().enumerate() {
            us.column_mut(k).mapv_inplace(|v| v * (x / s0));
        }
        let ust = us.t();
        let prev = &mut self.blocks[l - 1];
        prev.map_mats(|m| ust.dot(m));
        prev.dim_out = r;
        prev.compact();
        Ok(sigma)
    }
}

fn scale_of(sigma: &[f64]) -> f64 {
    match sigma.first() {
        Some(&x) if x > 0.0 => x,
        _ => 1.0,
    }
}

/// Truncated SVD returning `(U, σ, V†)` with at least one retained value.
fn factor(m: &ComplexMatrix, eps: f64) -> Result<(ComplexMatrix, Vec<f64>, ComplexMatrix), TensorError> {
    let (rows, cols) = m.dim();
    if rows == 0 || cols == 0 {
        return Ok(zero_factor(rows, cols));
    }
    let svd = svd_truncate(m, eps.max(RANK_FLOOR))?;
    if svd.rank == 0 {
        return Ok(zero_factor(rows, cols));
    }
    Ok((svd.u, svd.s, svd.vt))
}

fn zero_factor(rows: usize, cols: usize) -> (ComplexMatrix, Vec<f64>, ComplexMatrix) {
    let mut u = Array2::zeros((rows, 1));
    if rows > 0 {
        u[[0, 0]] = C64::new(1.0, 0.0);
    }
    (u, vec![0.0], Array2::zeros((1, cols)))
}
