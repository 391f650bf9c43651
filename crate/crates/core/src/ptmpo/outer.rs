use std::collections::HashMap;

use ndarray::Array2;

use super::{outer_count, ProcessTensor, PtError};
use crate::tensor::{eigh_hermitian, is_hermitian, kron, Block, Chain};
use crate::{ComplexMatrix, C64};

/// Embeds a PT for a `D`-level system into the space `dl ⊗ D ⊗ dr`, acting
/// as identity on the added factors.
pub fn expand_outer(pt: &ProcessTensor, dl: usize, dr: usize) -> Result<ProcessTensor, PtError> {
    let d = pt.dim;
    let dn = dl * d * dr;
    outer_count(dn)?;
    let (d2, dn2) = (d * d, (dn * dn) as u32);
    let comp = |l: usize, s: usize, r: usize| (l * d + s) * dr + r;
    let mut blocks = Vec::with_capacity(pt.chain.len());
    for b in &pt.chain.blocks {
        let mut nb = Block::new(b.dim_in, b.dim_out);
        nb.mats = b.mats.clone();
        for (&beta, &e) in &b.map {
            let (a, ap) = (beta as usize / d2, beta as usize % d2);
            let (nu, mu, nup, mup) = (a / d, a % d, ap / d, ap % d);
            for ln in 0..dl {
                for lm in 0..dl {
                    for rn in 0..dr {
                        for rm in 0..dr {
                            let x = comp(ln, nu, rn) * dn + comp(lm, mu, rm);
                            let xp = comp(ln, nup, rn) * dn + comp(lm, mup, rm);
                            nb.map.insert(x as u32 * dn2 + xp as u32, e);
                        }
                    }
                }
            }
        }
        blocks.push(nb);
    }
    let chain = Chain::new(blocks, pt.chain.closures.clone())?;
    Ok(ProcessTensor { dim: dn, dt: pt.dt, chain, repeat_from: pt.repeat_from })
}

/// Eigen-decomposition of a Hermitian coupling operator with degenerate
/// eigenvalues grouped.
#[derive(Debug, Clone)]
pub struct Degeneracy {
    pub dim: usize,
    /// Distinct eigenvalues in ascending order.
    pub values: Vec<f64>,
    /// Group of each eigenvector.
    pub labels: Vec<usize>,
    /// Eigenvectors as columns, in ascending eigenvalue order.
    pub basis: ComplexMatrix,
}

/// Groups eigenvalues of `a` that agree within `1e-9·max|λ|`.
pub fn reduce_by_degeneracy(a: &ComplexMatrix) -> Result<Degeneracy, PtError> {
    Degeneracy::new(a, true)
}

impl Degeneracy {
    /// With `group = false` every eigenvector forms its own group.
    pub fn new(a: &ComplexMatrix, group: bool) -> Result<Self, PtError> {
        let scale = a.iter().fold(0.0f64, |m, x| m.max(x.norm()));
        if !is_hermitian(a, 1e-12 * scale.max(1.0)) {
            return Err(PtError::NonHermitian);
        }
        let (w, v) = eigh_hermitian(a).map_err(|e| PtError::Expand(e.to_string()))?;
        let tol = 1e-9 * w.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let mut values: Vec<f64> = Vec::new();
        let mut labels = Vec::with_capacity(w.len());
        let mut first = f64::NAN;
        for &x in w.iter() {
            if values.is_empty() || !group || (x - first).abs() > tol {
                values.push(x);
                first = x;
            }
            labels.push(values.len() - 1);
        }
        // Mean over each group.
        let mut sums = vec![0.0; values.len()];
        let mut counts = vec![0usize; values.len()];
        for (x, &g) in w.iter().zip(&labels) {
            sums[g] += x;
            counts[g] += 1;
        }
        for g in 0..values.len() {
            values[g] = sums[g] / counts[g] as f64;
        }
        Ok(Degeneracy { dim: a.nrows(), values, labels, basis: v })
    }

    pub fn groups(&self) -> usize {
        self.values.len()
    }

    pub fn is_reduced(&self) -> bool {
        self.groups() < self.dim
    }

    /// Diagonal coupling operator on the group space.
    pub fn group_operator(&self) -> ComplexMatrix {
        Array2::from_diag(&ndarray::Array1::from_iter(self.values.iter().map(|&x| C64::new(x, 0.0))))
    }

    /// Expands a PT built on the `G` groups with diagonal coupling back to
    /// the full `D`-level system in its original basis. Requires every block
    /// to be diagonal in the outer indices.
    pub fn expand(&self, pt: &ProcessTensor) -> Result<ProcessTensor, PtError> {
        let (d, g) = (self.dim, self.groups());
        if pt.dim != g {
            return Err(PtError::Dimension(format!("{} groups, PT dimension {}", g, pt.dim)));
        }
        outer_count(d)?;
        let (d2, g2) = (d * d, g * g);
        // coeff[(x, x')][(g,h)] = Σ_{γ ∈ (g,h)} W[x,γ] W*[x',γ], W = U ⊗ U*.
        let w = kron(&self.basis, &self.basis.mapv(|x| x.conj()));
        let group_of = |gamma: usize| self.labels[gamma / d] * g + self.labels[gamma % d];
        let mut keys: HashMap<Vec<(usize, u64, u64)>, Vec<u32>> = HashMap::new();
        let mut order: Vec<Vec<(usize, u64, u64)>> = Vec::new();
        let mut coeff = vec![C64::new(0.0, 0.0); g2];
        for x in 0..d2 {
            for xp in 0..d2 {
                coeff.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
                for gamma in 0..d2 {
                    coeff[group_of(gamma)] += w[[x, gamma]] * w[[xp, gamma]].conj();
                }
                let key: Vec<(usize, u64, u64)> = coeff
                    .iter()
                    .enumerate()
                    .filter(|(_, c)| c.norm() > 1e-14)
                    .map(|(k, c)| (k, c.re.to_bits(), c.im.to_bits()))
                    .collect();
                if key.is_empty() {
                    continue;
                }
                let beta = (x * d2 + xp) as u32;
                keys.entry(key.clone())
                    .or_insert_with(|| {
                        order.push(key);
                        Vec::new()
                    })
                    .push(beta);
            }
        }
        let mut blocks = Vec::with_capacity(pt.chain.len());
        for (l, b) in pt.chain.blocks.iter().enumerate() {
            let mut diag: Vec<Option<usize>> = vec![None; g2];
            for (&beta, &e) in &b.map {
                let (a, ap) = (beta as usize / g2, beta as usize % g2);
                if a != ap {
                    return Err(PtError::Expand(format!("block {l} is not diagonal in the outer indices")));
                }
                diag[a] = Some(e);
            }
            let mut nb = Block::new(b.dim_in, b.dim_out);
            for key in &order {
                let mut m: Option<ComplexMatrix> = None;
                for &(k, re, im) in key {
                    if let Some(e) = diag[k] {
                        let c = C64::new(f64::from_bits(re), f64::from_bits(im));
                        let term = b.mats[e].mapv(|v| v * c);
                        m = Some(match m {
                            Some(acc) => acc + term,
                            None => term,
                        });
                    }
                }
                if let Some(m) = m {
                    if m.iter().all(|x| *x == C64::new(0.0, 0.0)) {
                        continue;
                    }
                    let idx = nb.push_matrix(m);
                    for &beta in &keys[key] {
                        nb.map.insert(beta, idx);
                    }
                }
            }
            blocks.push(nb);
        }
        let chain = Chain::new(blocks, pt.chain.closures.clone())?;
        Ok(ProcessTensor { dim: d, dt: pt.dt, chain, repeat_from: pt.repeat_from })
    }
}
