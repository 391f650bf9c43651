use std::collections::{BTreeMap, HashMap};

use ndarray::Array2;

use super::TensorError;
use crate::{ComplexMatrix, C64};

/// One PT-MPO block: a sparse map from outer index `β = α·D² + α′` to
/// `dim_out × dim_in` matrices over the inner bonds.
///
/// Matrices are stored once and shared between outer indices that carry
/// identical values. Absent outer indices are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub dim_in: usize,
    pub dim_out: usize,
    pub mats: Vec<ComplexMatrix>,
    pub map: BTreeMap<u32, usize>,
}

impl Block {
    pub fn new(dim_in: usize, dim_out: usize) -> Self {
        Block { dim_in, dim_out, mats: Vec::new(), map: BTreeMap::new() }
    }

    /// Block acting as identity on a `dim`-level system with trivial bonds.
    pub fn identity(dim: usize) -> Self {
        let mut b = Block::new(1, 1);
        let idx = b.push_matrix(Array2::from_elem((1, 1), C64::new(1.0, 0.0)));
        let d2 = (dim * dim) as u32;
        for a in 0..d2 {
            b.map.insert(a * d2 + a, idx);
        }
        b
    }

    /// Appends a matrix to the shared storage and returns its index.
    pub fn push_matrix(&mut self, m: ComplexMatrix) -> usize {
        self.mats.push(m);
        self.mats.len() - 1
    }

    /// Inserts a matrix for outer index `beta`, skipping all-zero matrices.
    pub fn insert(&mut self, beta: u32, m: ComplexMatrix) {
        if m.iter().all(|x| *x == C64::new(0.0, 0.0)) {
            return;
        }
        let idx = self.push_matrix(m);
        self.map.insert(beta, idx);
    }

    pub fn get(&self, beta: u32) -> Option<&ComplexMatrix> {
        self.map.get(&beta).map(|&i| &self.mats[i])
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, &ComplexMatrix)> {
        self.map.iter().map(move |(&b, &i)| (b, &self.mats[i]))
    }

    pub fn entry_count(&self) -> usize {
        self.map.len()
    }

    /// Drops unreferenced and all-zero matrices and renumbers the rest.
    pub fn compact(&mut self) {
        let mut used = vec![false; self.mats.len()];
        for &i in self.map.values() {
            used[i] = true;
        }
        for (i, m) in self.mats.iter().enumerate() {
            if used[i] && m.iter().all(|x| *x == C64::new(0.0, 0.0)) {
                used[i] = false;
            }
        }
        let mut remap = vec![usize::MAX; self.mats.len()];
        let mut mats = Vec::new();
        for (i, m) in std::mem::take(&mut self.mats).into_iter().enumerate() {
            if used[i] {
                remap[i] = mats.len();
                mats.push(m);
            }
        }
        self.map.retain(|_, i| remap[*i] != usize::MAX);
        for i in self.map.values_mut() {
            *i = remap[*i];
        }
        self.mats = mats;
    }

    /// Merges bit-identical matrices into one shared copy.
    pub fn dedup(&mut self) {
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        let mut remap = Vec::with_capacity(self.mats.len());
        let mut mats = Vec::new();
        for m in std::mem::take(&mut self.mats) {
            let mut key = Vec::with_capacity(2 * m.len() + 2);
            key.push(m.nrows() as u64);
            key.push(m.ncols() as u64);
            key.extend(m.iter().flat_map(|x| [x.re.to_bits(), x.im.to_bits()]));
            let idx = *seen.entry(key).or_insert_with(|| {
                mats.push(m);
                mats.len() - 1
            });
            remap.push(idx);
        }
        for i in self.map.values_mut() {
            *i = remap[*i];
        }
        self.mats = mats;
    }

    pub fn check_shapes(&self, index: usize) -> Result<(), TensorError> {
        for (beta, m) in self.entries() {
            if m.dim() != (self.dim_out, self.dim_in) {
                return Err(TensorError::ShapeMismatch {
                    index,
                    beta,
                    expected: (self.dim_out, self.dim_in),
                    found: m.dim(),
                });
            }
        }
        Ok(())
    }

    /// Replaces every stored matrix by `f(matrix)`.
    pub fn map_mats(&mut self, mut f: impl FnMut(&ComplexMatrix) -> ComplexMatrix) {
        for m in self.mats.iter_mut() {
            *m = f(m);
        }
    }

    /// Indices of matrices that are referenced by at least one outer index,
    /// in storage order.
    pub fn used_mats(&self) -> Vec<usize> {
        let mut used = vec![false; self.mats.len()];
        for &i in self.map.values() {
            used[i] = true;
        }
        (0..self.mats.len()).filter(|&i| used[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dedup_shares_storage() {
        let mut b = Block::new(1, 1);
        b.insert(0, Array2::from_elem((1, 1), C64::new(2.0, 0.0)));
        b.insert(5, Array2::from_elem((1, 1), C64::new(2.0, 0.0)));
        b.insert(7, Array2::zeros((1, 1)));
        assert_eq!(b.entry_count(), 2);
        b.dedup();
        assert_eq!(b.mats.len(), 1);
        assert_eq!(b.get(5), b.get(0));
    }

    #[test]
    fn compact_removes_zeros() {
        let mut b = Block::identity(2);
        b.mats[0].fill(C64::new(0.0, 0.0));
        b.compact();
        assert_eq!(b.entry_count(), 0);
        assert!(b.mats.is_empty());
    }
}
