use std::collections::{BTreeMap, HashMap};

use ndarray::{Array1, Array2};

use super::{Compression, ProcessTensor, PtError};
use crate::tensor::{Block, Chain, TensorError, RANK_FLOOR};
use crate::{ComplexMatrix, C64};

/// Retained index pairs `(i_outer, i_inner)` per bond; `None` keeps the full
/// Kronecker product `i_outer·χ_inner + i_inner`.
pub type BondSelection = Vec<Option<Vec<(usize, usize)>>>;

fn full_pairs(da: usize, db: usize) -> Vec<(usize, usize)> {
    (0..da).flat_map(|i| (0..db).map(move |j| (i, j))).collect()
}

fn restricted_kron(a: &ComplexMatrix, b: &ComplexMatrix, rows: &[(usize, usize)], cols: &[(usize, usize)]) -> ComplexMatrix {
    let mut m = Array2::zeros((rows.len(), cols.len()));
    for (r, &(r1, r2)) in rows.iter().enumerate() {
        for (c, &(c1, c2)) in cols.iter().enumerate() {
            m[[r, c]] = a[[r1, c1]] * b[[r2, c2]];
        }
    }
    m
}

/// Product of two blocks, `Σ_{α″} A^{(α,α″)} ⊗ B^{(α″,α′)}`, on the selected
/// bond pairs. Outer indices sharing the same list of factor pairs share one
/// matrix.
fn block_product(a: &Block, b: &Block, d2: u32, rows: &[(usize, usize)], cols: &[(usize, usize)]) -> Block {
    let mut b_rows: HashMap<u32, Vec<(u32, usize)>> = HashMap::new();
    for (&beta, &e) in &b.map {
        b_rows.entry(beta / d2).or_default().push((beta % d2, e));
    }
    let mut terms: BTreeMap<u32, Vec<(usize, usize)>> = BTreeMap::new();
    for (&beta, &e1) in &a.map {
        let (alpha, mid) = (beta / d2, beta % d2);
        if let Some(list) = b_rows.get(&mid) {
            for &(alpha_in, e2) in list {
                terms.entry(alpha * d2 + alpha_in).or_default().push((e1, e2));
            }
        }
    }
    let mut out = Block::new(cols.len(), rows.len());
    let mut cache: HashMap<Vec<(usize, usize)>, Option<usize>> = HashMap::new();
    for (beta, mut key) in terms {
        key.sort_unstable();
        let idx = *cache.entry(key).or_insert_with_key(|key| {
            let mut m: ComplexMatrix = Array2::zeros((rows.len(), cols.len()));
            for &(e1, e2) in key {
                m = m + restricted_kron(&a.mats[e1], &b.mats[e2], rows, cols);
            }
            if m.iter().all(|x| *x == C64::new(0.0, 0.0)) {
                None
            } else {
                Some(out.push_matrix(m))
            }
        });
        if let Some(i) = idx {
            out.map.insert(beta, i);
        }
    }
    out
}

/// Exact product chain, with the outer chain applied after the inner one.
pub fn product_chain(outer: &Chain, inner: &Chain, dim: usize, sel: Option<&BondSelection>) -> Result<Chain, TensorError> {
    let d2 = (dim * dim) as u32;
    let n = outer.len();
    let bonds_a = outer.bond_dims();
    let bonds_b = inner.bond_dims();
    let pairs: Vec<Vec<(usize, usize)>> = (0..=n)
        .map(|l| match sel.and_then(|s| s[l].clone()) {
            Some(p) => p,
            None => full_pairs(bonds_a[l], bonds_b[l]),
        })
        .collect();
    let mut blocks = Vec::with_capacity(n);
    let mut closures = Vec::with_capacity(n);
    for l in 0..n {
        blocks.push(block_product(&outer.blocks[l], &inner.blocks[l], d2, &pairs[l + 1], &pairs[l]));
        let (qa, qb) = (&outer.closures[l], &inner.closures[l]);
        closures.push(Array1::from_iter(pairs[l + 1].iter().map(|&(i, j)| qa[i] * qb[j])));
    }
    Chain::new(blocks, closures)
}

/// Puts a copy of the chain into right-canonical form and returns it with
/// the Schmidt values per bond (truncated at relative `eps`).
pub fn schmidt_values(chain: &Chain, eps: f64) -> Result<(Chain, Vec<Vec<f64>>), TensorError> {
    let mut c = chain.clone();
    let n = c.len();
    c.forward_sweep(0, n, RANK_FLOOR)?;
    let sv = c.backward_sweep(0, n, eps)?;
    Ok((c, sv))
}

/// Index pairs whose product of Schmidt values reaches `eps` relative to the
/// leading product. Empty value lists keep the full product.
pub fn select_pairs(sa: &[f64], sb: &[f64], eps: f64) -> Option<Vec<(usize, usize)>> {
    if sa.is_empty() || sb.is_empty() {
        return None;
    }
    let cut = eps * sa[0] * sb[0];
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for (i, x) in sa.iter().enumerate() {
        for (j, y) in sb.iter().enumerate() {
            if x * y >= cut {
                pairs.push((i, j));
            }
        }
    }
    if pairs.is_empty() {
        pairs.push((0, 0));
    }
    Some(pairs)
}

/// Combines two PTs of the same environment grid: `outer ∘ inner`, followed
/// by a forward and backward compression sweep.
pub fn stack(outer: &ProcessTensor, inner: &ProcessTensor, c: &Compression) -> Result<ProcessTensor, PtError> {
    outer.check_compatible(inner)?;
    let mut chain = product_chain(&outer.chain, &inner.chain, outer.dim, None)?;
    chain.sweep_pair(c.forward(), c.backward())?;
    Ok(ProcessTensor { dim: outer.dim, dt: outer.dt, chain, repeat_from: None })
}

/// Like [`stack`], but both factors are canonicalized first and only pairs
/// of inner indices with significant Schmidt-value products are built.
pub fn preselect_combine(outer: &ProcessTensor, inner: &ProcessTensor, c: &Compression) -> Result<ProcessTensor, PtError> {
    let eps = c.select();
    if eps <= 0.0 {
        return stack(outer, inner, c);
    }
    outer.check_compatible(inner)?;
    let (ca, sa) = schmidt_values(&outer.chain, eps)?;
    let (cb, sb) = schmidt_values(&inner.chain, eps)?;
    let sel: BondSelection = (0..=ca.len()).map(|l| select_pairs(&sa[l], &sb[l], eps)).collect();
    let mut chain = product_chain(&ca, &cb, outer.dim, Some(&sel))?;
    chain.sweep_pair(c.forward(), c.backward())?;
    Ok(ProcessTensor { dim: outer.dim, dt: outer.dt, chain, repeat_from: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::sweep_tests::{contract, random_chain};
    use rand::{Rng, SeedableRng};

    fn weights(rng: &mut impl Rng, n: usize, nb: usize) -> Vec<Vec<C64>> {
        (0..n)
            .map(|_| (0..nb).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect())
            .collect()
    }

    /// Drives a state through the chain alone and returns the reduced state
    /// after every block.
    fn apply(chain: &Chain, dim: usize, rho0: &[C64]) -> Vec<Vec<C64>> {
        let d2 = dim * dim;
        // state[(bond, α)]
        let mut state: Vec<Vec<C64>> = vec![rho0.to_vec()];
        let mut out = Vec::new();
        for (l, b) in chain.blocks.iter().enumerate() {
            let mut next = vec![vec![C64::new(0.0, 0.0); d2]; b.dim_out];
            for (beta, m) in b.entries() {
                let (a, ap) = ((beta as usize) / d2, (beta as usize) % d2);
                for o in 0..b.dim_out {
                    for i in 0..b.dim_in {
                        next[o][a] += m[[o, i]] * state[i][ap];
                    }
                }
            }
            state = next;
            let q = &chain.closures[l];
            out.push((0..d2).map(|a| (0..b.dim_out).map(|o| q[o] * state[o][a]).sum()).collect());
        }
        out
    }

    /// Applies `inner` then `outer` on a joint bond state `[i1][i2][α]`.
    fn apply_pair(outer: &Chain, inner: &Chain, dim: usize, rho0: &[C64]) -> Vec<Vec<C64>> {
        let d2 = dim * dim;
        let z = C64::new(0.0, 0.0);
        let mut s = vec![vec![rho0.to_vec()]];
        let mut out = Vec::new();
        for l in 0..outer.len() {
            let (a, b) = (&outer.blocks[l], &inner.blocks[l]);
            let mut t = vec![vec![vec![z; d2]; b.dim_out]; a.dim_in];
            for (beta, m) in b.entries() {
                let (x, xp) = ((beta as usize) / d2, (beta as usize) % d2);
                for i1 in 0..a.dim_in {
                    for o in 0..b.dim_out {
                        for i in 0..b.dim_in {
                            t[i1][o][x] += m[[o, i]] * s[i1][i][xp];
                        }
                    }
                }
            }
            let mut u = vec![vec![vec![z; d2]; b.dim_out]; a.dim_out];
            for (beta, m) in a.entries() {
                let (x, xp) = ((beta as usize) / d2, (beta as usize) % d2);
                for o in 0..a.dim_out {
                    for i in 0..a.dim_in {
                        for i2 in 0..b.dim_out {
                            u[o][i2][x] += m[[o, i]] * t[i][i2][xp];
                        }
                    }
                }
            }
            s = u;
            let (qa, qb) = (&outer.closures[l], &inner.closures[l]);
            out.push(
                (0..d2)
                    .map(|x| {
                        let mut acc = z;
                        for o1 in 0..a.dim_out {
                            for o2 in 0..b.dim_out {
                                acc += qa[o1] * qb[o2] * s[o1][o2][x];
                            }
                        }
                        acc
                    })
                    .collect(),
            );
        }
        out
    }

    fn assert_close(x: &[Vec<C64>], y: &[Vec<C64>], tol: f64) {
        for (a, b) in x.iter().flatten().zip(y.iter().flatten()) {
            assert!((a - b).norm() < tol, "{a} vs {b}");
        }
    }

    #[test]
    fn product_acts_as_composition() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(21);
        let a = random_chain(&mut rng, &[1, 2, 3, 1], 16);
        let b = random_chain(&mut rng, &[1, 3, 2, 1], 16);
        let p = product_chain(&a, &b, 2, None).unwrap();
        assert_eq!(p.bond_dims(), vec![1, 6, 6, 1]);
        let rho: Vec<C64> = (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        assert_close(&apply(&p, 2, &rho), &apply_pair(&a, &b, 2, &rho), 1e-12);
        let w = weights(&mut rng, 3, 16);
        assert!(contract(&p, &w, 2).is_finite());
    }

    #[test]
    fn exact_preselection_matches_stack() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let a = random_chain(&mut rng, &[1, 3, 3, 2, 1], 16);
        let b = random_chain(&mut rng, &[1, 2, 4, 2, 1], 16);
        let rho: Vec<C64> = (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let pa = ProcessTensor::new(2, 0.1, a.clone()).unwrap();
        let pb = ProcessTensor::new(2, 0.1, b.clone()).unwrap();
        let reference = apply_pair(&a, &b, 2, &rho);
        let s = stack(&pa, &pb, &Compression::new(0.0)).unwrap();
        assert_close(&apply(&s.chain, 2, &rho), &reference, 1e-10);
        let c = Compression { threshold: 1e-300, ..Default::default() };
        let p = preselect_combine(&pa, &pb, &c).unwrap();
        assert_close(&apply(&p.chain, 2, &rho), &reference, 1e-10);
    }

    #[test]
    fn identity_factor_is_neutral() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(22);
        let a = random_chain(&mut rng, &[1, 3, 2, 1], 16);
        let id = Chain::trivial(2, 3);
        let rho: Vec<C64> = (0..4).map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
        let ref_out = apply(&a, 2, &rho);
        for p in [product_chain(&a, &id, 2, None).unwrap(), product_chain(&id, &a, 2, None).unwrap()] {
            let out = apply(&p, 2, &rho);
            for (x, y) in out.iter().flatten().zip(ref_out.iter().flatten()) {
                assert!((x - y).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn selection_rule() {
        let sel = select_pairs(&[1.0, 0.1, 0.01], &[1.0, 0.01], 1e-3).unwrap();
        assert_eq!(sel, vec![(0, 0), (0, 1), (1, 0), (1, 1), (2, 0)]);
        assert_eq!(select_pairs(&[], &[1.0], 0.1), None);
    }
}
