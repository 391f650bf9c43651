//! The process tensor container and operations on it.

mod combine;
mod io;
mod outer;

use ndarray::Array1;

use crate::tensor::{Block, Chain, TensorError};
use crate::C64;

pub use combine::{preselect_combine, product_chain, schmidt_values, select_pairs, stack, BondSelection};
pub use io::{continuation_path, read_pt, write_pt, FORMAT_VERSION, MAGIC};
pub use outer::{expand_outer, reduce_by_degeneracy, Degeneracy};

#[derive(Debug, thiserror::Error)]
pub enum PtError {
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("process tensors live on different grids: {0}")]
    Grid(String),
    #[error("system dimension mismatch: {0}")]
    Dimension(String),
    #[error("outer index overflow: dimension {0} gives more than 2^32 outer indices")]
    Overflow(usize),
    #[error("coupling operator is not Hermitian")]
    NonHermitian,
    #[error("cannot expand process tensor: {0}")]
    Expand(String),
    #[error("'{path}': not a process tensor file ({msg})")]
    Format { path: String, msg: String },
    #[error("'{path}': format version {found}, expected {expected}")]
    Version { path: String, found: u32, expected: u32 },
    #[error("'{0}': file is truncated")]
    Truncated(String),
    #[error("continuation file '{0}' is missing")]
    MissingFile(String),
    #[error("i/o error on '{0}': {1}")]
    Io(String, std::io::Error),
    #[error("periodic process tensors cannot be {0}")]
    Periodic(&'static str),
}

/// Compression thresholds. Sweeps use `threshold` scaled by the direction
/// ratio, preselection by `select_ratio`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Compression {
    pub threshold: f64,
    pub forward_ratio: f64,
    pub backward_ratio: f64,
    pub select_ratio: f64,
}

impl Default for Compression {
    fn default() -> Self {
        Compression { threshold: 0.0, forward_ratio: 1.0, backward_ratio: 1.0, select_ratio: 1.0 }
    }
}

impl Compression {
    pub fn new(threshold: f64) -> Self {
        Compression { threshold, ..Default::default() }
    }

    pub fn with_threshold(self, threshold: f64) -> Self {
        Compression { threshold, ..self }
    }

    pub fn forward(&self) -> f64 {
        self.threshold * self.forward_ratio
    }

    pub fn backward(&self) -> f64 {
        self.threshold * self.backward_ratio
    }

    pub fn select(&self) -> f64 {
        self.threshold * self.select_ratio
    }
}

/// A PT-MPO on a time grid with step `dt` for a `dim`-level system.
///
/// For a periodic process tensor `repeat_from = Some(k)`: steps `0..k` use
/// the leading blocks, later steps cycle through `blocks[k..]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessTensor {
    pub dim: usize,
    pub dt: f64,
    pub chain: Chain,
    pub repeat_from: Option<usize>,
}

impl ProcessTensor {
    pub fn new(dim: usize, dt: f64, chain: Chain) -> Result<Self, PtError> {
        chain.validate()?;
        outer_count(dim)?;
        Ok(ProcessTensor { dim, dt, chain, repeat_from: None })
    }

    /// Identity process tensor over `n` steps.
    pub fn trivial(dim: usize, dt: f64, n: usize) -> Self {
        ProcessTensor { dim, dt, chain: Chain::trivial(dim, n), repeat_from: None }
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    /// Maximum number of steps this PT can drive; `None` when periodic.
    pub fn max_steps(&self) -> Option<usize> {
        match self.repeat_from {
            Some(_) => None,
            None => Some(self.chain.len()),
        }
    }

    fn index(&self, step: usize) -> usize {
        match self.repeat_from {
            Some(k) if step >= k => k + (step - k) % (self.chain.len() - k),
            _ => step,
        }
    }

    pub fn block(&self, step: usize) -> &Block {
        &self.chain.blocks[self.index(step)]
    }

    pub fn closure(&self, step: usize) -> &Array1<C64> {
        &self.chain.closures[self.index(step)]
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.chain.bond_dims()
    }

    pub fn max_bond(&self) -> usize {
        self.chain.max_bond()
    }

    /// One forward and one backward sweep over all blocks.
    pub fn sweep(&mut self, c: &Compression) -> Result<(), PtError> {
        if self.repeat_from.is_some() {
            return Err(PtError::Periodic("swept as a whole"));
        }
        self.chain.sweep_pair(c.forward(), c.backward())?;
        Ok(())
    }

    pub(crate) fn check_compatible(&self, other: &ProcessTensor) -> Result<(), PtError> {
        if self.dim != other.dim {
            return Err(PtError::Dimension(format!("{} vs {}", self.dim, other.dim)));
        }
        if (self.dt - other.dt).abs() > 1e-12 * self.dt.abs().max(other.dt.abs()) {
            return Err(PtError::Grid(format!("dt {} vs {}", self.dt, other.dt)));
        }
        if self.len() != other.len() {
            return Err(PtError::Grid(format!("{} vs {} steps", self.len(), other.len())));
        }
        if self.repeat_from.is_some() || other.repeat_from.is_some() {
            return Err(PtError::Periodic("combined"));
        }
        Ok(())
    }
}

/// Number of outer indices `D⁴`, guarded against `u32` overflow.
pub fn outer_count(dim: usize) -> Result<u32, PtError> {
    let d4 = (dim as u128).pow(4);
    if dim == 0 || d4 > u32::MAX as u128 {
        return Err(PtError::Overflow(dim));
    }
    Ok(d4 as u32)
}
