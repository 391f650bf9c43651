use std::cell::Cell;

use ndarray::{s, Array2};
use ndarray_linalg::{JobSvd, SVDDC, SVD};

use super::TensorError;
use crate::ComplexMatrix;

thread_local! {
    static SVD_COUNT: Cell<u64> = const { Cell::new(0) };
}

/// Number of SVDs performed on this thread since the last reset.
pub fn svd_count() -> u64 {
    SVD_COUNT.with(|c| c.get())
}

pub fn reset_svd_count() {
    SVD_COUNT.with(|c| c.set(0));
}

/// Thin singular value decomposition truncated to `rank` values.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: ComplexMatrix,
    pub s: Vec<f64>,
    pub vt: ComplexMatrix,
    pub rank: usize,
}

impl Svd {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let mut us = self.u.clone();
        for (k, sigma) in self.s.iter().enumerate() {
            us.column_mut(k).mapv_inplace(|x| x * sigma);
        }
        us.dot(&self.vt)
    }
}

/// SVD keeping exactly the singular values with `σ_k ≥ eps·σ_0`.
///
/// A zero matrix yields `rank == 0` with empty factors.
pub fn svd_truncate(m: &ComplexMatrix, eps: f64) -> Result<Svd, TensorError> {
    if m.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(TensorError::NonFinite);
    }
    SVD_COUNT.with(|c| c.set(c.get() + 1));
    let (rows, cols) = m.dim();
    let (u, s, vt) = match m.svddc(JobSvd::Some) {
        Ok((Some(u), s, Some(vt))) => (u, s, vt),
        _ => match m.svd(true, true) {
            Ok((Some(u), s, Some(vt))) => {
                let k = rows.min(cols);
                (u.slice(s![.., ..k]).to_owned(), s, vt.slice(s![..k, ..]).to_owned())
            }
            Ok(_) => return Err(TensorError::Svd("missing singular vectors".into())),
            Err(e) => return Err(TensorError::Svd(e.to_string())),
        },
    };
    let sigma0 = s.first().copied().unwrap_or(0.0);
    if sigma0 == 0.0 {
        return Ok(Svd { u: Array2::zeros((rows, 0)), s: Vec::new(), vt: Array2::zeros((0, cols)), rank: 0 });
    }
    let cut = eps * sigma0;
    let rank = s.iter().take_while(|&&x| x >= cut).count().max(1);
    Ok(Svd {
        u: u.slice(s![.., ..rank]).to_owned(),
        s: s.iter().take(rank).copied().collect(),
        vt: vt.slice(s![..rank, ..]).to_owned(),
        rank,
    })
}
