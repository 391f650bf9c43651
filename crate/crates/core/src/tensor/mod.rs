//! Dense linear algebra and the MPO compression engine.

mod block;
mod expm;
mod svd;
mod sweep;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};

use crate::{ComplexMatrix, C64};

pub use block::Block;
pub use expm::expm;
pub use svd::{reset_svd_count, svd_count, svd_truncate, Svd};
pub use sweep::{Chain, RANK_FLOOR};
#[cfg(test)]
pub(crate) use sweep::tests as sweep_tests;

#[derive(Debug, thiserror::Error)]
pub enum TensorError {
    #[error("bond mismatch at block {index}: expected {expected}, found {found}")]
    BondMismatch { index: usize, expected: usize, found: usize },
    #[error("closure after block {index} has length {found}, bond dimension is {expected}")]
    ClosureMismatch { index: usize, expected: usize, found: usize },
    #[error("matrix for outer index {beta} in block {index} has shape {found:?}, expected {expected:?}")]
    ShapeMismatch { index: usize, beta: u32, expected: (usize, usize), found: (usize, usize) },
    #[error("SVD did not converge: {0}")]
    Svd(String),
    #[error("linear algebra failure: {0}")]
    Linalg(String),
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

/// Kronecker product with row index `i_a * rows_b + i_b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for i in 0..ra {
        for j in 0..ca {
            let x = a[[i, j]];
            if x == C64::new(0.0, 0.0) {
                continue;
            }
            let mut tile = out.slice_mut(ndarray::s![i * rb..(i + 1) * rb, j * cb..(j + 1) * cb]);
            tile.zip_mut_with(b, |o, y| *o = x * y);
        }
    }
    out
}

/// Kronecker product of vectors.
pub fn kron_vec(a: &Array1<C64>, b: &Array1<C64>) -> Array1<C64> {
    let mut out = Array1::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Conjugate transpose.
pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.t().mapv(|x| x.conj())
}

/// Largest absolute entry.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.norm()))
}

/// Largest absolute entrywise difference of two equally shaped matrices.
pub fn max_abs_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// Row-major vectorization `ρ[ν, μ] -> v[ν·D + μ]`.
pub fn vectorize(m: &ComplexMatrix) -> Array1<C64> {
    Array1::from_iter(m.iter().copied())
}

/// Inverse of [`vectorize`] for a square matrix.
pub fn unvectorize(v: &Array1<C64>, dim: usize) -> ComplexMatrix {
    Array2::from_shape_vec((dim, dim), v.to_vec()).expect("vector length is dim²")
}

/// Eigen-decomposition of a Hermitian matrix, ascending eigenvalues with
/// eigenvectors in the columns. The input is copied to column-major layout,
/// which the LAPACK wrapper handles without conjugating the result.
pub fn eigh_hermitian(m: &ComplexMatrix) -> Result<(Array1<f64>, ComplexMatrix), TensorError> {
    let f = m.t().as_standard_layout().to_owned().reversed_axes();
    f.eigh(UPLO::Upper).map_err(|e| TensorError::Linalg(e.to_string()))
}

/// Checks whether `m` is Hermitian to absolute tolerance `tol`.
pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &dagger(m)) <= tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::eval_str;
    use rand::{Rng, SeedableRng};

    fn random(rng: &mut impl Rng, r: usize, c: usize) -> ComplexMatrix {
        Array2::from_shape_fn((r, c), |_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn kron_identities() {
        let id6 = kron(&Array2::eye(2), &Array2::eye(3));
        assert_eq!(id6, Array2::<C64>::eye(6));
        let z = kron(&eval_str("{sigma_z}").unwrap(), &Array2::eye(2));
        let diag: Vec<f64> = (0..4).map(|i| z[[i, i]].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn kron_mixed_product() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let (a, b, c, d) = (random(&mut rng, 2, 2), random(&mut rng, 2, 2), random(&mut rng, 2, 2), random(&mut rng, 2, 2));
        let lhs = kron(&a, &b).dot(&kron(&c, &d));
        let rhs = kron(&a.dot(&c), &b.dot(&d));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-14);
    }

    #[test]
    fn vectorization_round_trip() {
        let m = eval_str("{|0><1|_3 + 2*|2><0|_3}").unwrap();
        let v = vectorize(&m);
        assert_eq!(v[1], C64::new(1.0, 0.0));
        assert_eq!(v[6], C64::new(2.0, 0.0));
        assert_eq!(unvectorize(&v, 3), m);
    }

    #[test]
    fn complex_hermitian_eigenvectors() {
        let h = eval_str("{0.3*sigma_x + 0.7*sigma_z + 0.2*sigma_y}").unwrap();
        let (w, v) = eigh_hermitian(&h).unwrap();
        let lhs = h.dot(&v);
        let rhs = v.dot(&Array2::from_diag(&w.mapv(|x| C64::new(x, 0.0))));
        assert!(max_abs_diff(&lhs, &rhs) < 1e-14);
        assert!(w[0] < w[1]);
    }
}
