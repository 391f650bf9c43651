use ndarray::Array2;
use ndarray_linalg::{Factorize, Solve};

use super::TensorError;
use crate::{ComplexMatrix, C64};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

/// Matrix exponential by scaling and squaring with a degree-13 Padé approximant.
pub fn expm(a: &ComplexMatrix) -> Result<ComplexMatrix, TensorError> {
    let n = a.nrows();
    if !a.is_square() {
        return Err(TensorError::Linalg(format!("expm of non-square {:?} matrix", a.dim())));
    }
    if a.iter().any(|x| !x.re.is_finite() || !x.im.is_finite()) {
        return Err(TensorError::NonFinite);
    }
    let norm1 = (0..n).map(|j| a.column(j).iter().map(|x| x.norm()).sum::<f64>()).fold(0.0, f64::max);
    if norm1 == 0.0 {
        return Ok(Array2::eye(n));
    }
    let s = if norm1 > THETA13 { (norm1 / THETA13).log2().ceil() as i32 } else { 0 };
    let scale = C64::new(0.5f64.powi(s), 0.0);
    let a = a.mapv(|x| x * scale);
    let b = PADE13;
    let id: ComplexMatrix = Array2::eye(n);
    let a2 = a.dot(&a);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let c = |k: usize| C64::new(b[k], 0.0);
    let lin = |x: &ComplexMatrix, y: &ComplexMatrix, z: &ComplexMatrix, k: [usize; 3]| {
        x.mapv(|v| v * c(k[0])) + y.mapv(|v| v * c(k[1])) + z.mapv(|v| v * c(k[2]))
    };
    let u_inner = a6.dot(&lin(&a6, &a4, &a2, [13, 11, 9])) + lin(&a6, &a4, &a2, [7, 5, 3]) + id.mapv(|v| v * c(1));
    let u = a.dot(&u_inner);
    let v = a6.dot(&lin(&a6, &a4, &a2, [12, 10, 8])) + lin(&a6, &a4, &a2, [6, 4, 2]) + id.mapv(|v| v * c(0));
    let p = &v + &u;
    let q = &v - &u;
    let mut r = Array2::zeros((n, n));
    let lu = q.factorize().map_err(|e| TensorError::Linalg(e.to_string()))?;
    for j in 0..n {
        let col = lu.solve(&p.column(j).to_owned()).map_err(|e| TensorError::Linalg(e.to_string()))?;
        r.column_mut(j).assign(&col);
    }
    for _ in 0..s {
        r = r.dot(&r);
    }
    Ok(r)
}
