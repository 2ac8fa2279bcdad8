//! Index bookkeeping for operators on tensor products of registers.
//!
//! Every function takes the operator as a plain square [`ComplexMatrix`]
//! together with `dims`, the ordered list of register dimensions whose
//! product must equal the matrix dimension. Register `0` is the leftmost
//! (slowest-varying) factor, matching row-major Kronecker order.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::matrix::{ComplexMatrix, ZERO};

fn check_dims(m: &ComplexMatrix, dims: &[usize]) -> Result<usize> {
    if !m.is_square() {
        return Err(CoreError::structural("operator must be square"));
    }
    if dims.is_empty() || dims.iter().any(|&d| d == 0) {
        return Err(CoreError::structural("register dimensions must be positive"));
    }
    let total: usize = dims.iter().product();
    if total != m.rows {
        return Err(CoreError::structural(format!(
            "register dimensions {:?} multiply to {}, matrix has dimension {}",
            dims, total, m.rows
        )));
    }
    Ok(total)
}

fn check_subset(dims: &[usize], subset: &[usize]) -> Result<()> {
    for &s in subset {
        if s >= dims.len() {
            return Err(CoreError::structural(format!(
                "register index {} out of range for {} registers",
                s,
                dims.len()
            )));
        }
    }
    let mut seen = vec![false; dims.len()];
    for &s in subset {
        if seen[s] {
            return Err(CoreError::structural(format!("register index {} repeated", s)));
        }
        seen[s] = true;
    }
    Ok(())
}

fn decompose(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for k in (0..dims.len()).rev() {
        out[k] = index % dims[k];
        index /= dims[k];
    }
}

fn compose(parts: &[usize], dims: &[usize]) -> usize {
    parts.iter().zip(dims).fold(0, |acc, (&p, &d)| acc * d + p)
}

/// Traces out the registers listed in `drop`, keeping the rest in order.
pub fn partial_trace_subset(
    m: &ComplexMatrix,
    dims: &[usize],
    drop: &[usize],
) -> Result<ComplexMatrix> {
    check_dims(m, dims)?;
    check_subset(dims, drop)?;
    if drop.len() == dims.len() {
        return Err(CoreError::structural("cannot trace out every register"));
    }
    let n = dims.len();
    let is_dropped: Vec<bool> = (0..n).map(|k| drop.contains(&k)).collect();
    let keep: Vec<usize> = (0..n).filter(|k| !is_dropped[*k]).collect();
    let keep_dims: Vec<usize> = keep.iter().map(|&k| dims[k]).collect();
    let drop_dims: Vec<usize> = drop.iter().map(|&k| dims[k]).collect();
    let dk: usize = keep_dims.iter().product();
    let dd: usize = drop_dims.iter().product();

    let mut out = ComplexMatrix::zeros(dk, dk);
    let mut kr = vec![0usize; keep.len()];
    let mut kc = vec![0usize; keep.len()];
    let mut td = vec![0usize; drop.len()];
    let mut full_r = vec![0usize; n];
    let mut full_c = vec![0usize; n];
    for r in 0..dk {
        decompose(r, &keep_dims, &mut kr);
        for c in 0..dk {
            decompose(c, &keep_dims, &mut kc);
            let mut acc = ZERO;
            for t in 0..dd {
                decompose(t, &drop_dims, &mut td);
                for (slot, &k) in keep.iter().enumerate() {
                    full_r[k] = kr[slot];
                    full_c[k] = kc[slot];
                }
                for (slot, &d) in drop.iter().enumerate() {
                    full_r[d] = td[slot];
                    full_c[d] = td[slot];
                }
                acc += m.get(compose(&full_r, dims), compose(&full_c, dims));
            }
            out.set(r, c, acc);
        }
    }
    Ok(out)
}

/// Traces out the single register `drop`.
pub fn partial_trace(m: &ComplexMatrix, dims: &[usize], drop: usize) -> Result<ComplexMatrix> {
    partial_trace_subset(m, dims, &[drop])
}

/// Transposes the indices of the registers in `subset`, leaving the rest.
pub fn partial_transpose_subset(
    m: &ComplexMatrix,
    dims: &[usize],
    subset: &[usize],
) -> Result<ComplexMatrix> {
    let total = check_dims(m, dims)?;
    check_subset(dims, subset)?;
    let n = dims.len();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut ri = vec![0usize; n];
    let mut ci = vec![0usize; n];
    for r in 0..total {
        decompose(r, dims, &mut ri);
        for c in 0..total {
            decompose(c, dims, &mut ci);
            let mut tr = ri.clone();
            let mut tc = ci.clone();
            for &s in subset {
                tr[s] = ci[s];
                tc[s] = ri[s];
            }
            out.set(compose(&tr, dims), compose(&tc, dims), m.get(r, c));
        }
    }
    Ok(out)
}

/// Transposes the single register `party`.
pub fn partial_transpose(m: &ComplexMatrix, dims: &[usize], party: usize) -> Result<ComplexMatrix> {
    partial_transpose_subset(m, dims, &[party])
}

/// Reorders registers so that output register `k` is input register
/// `order[k]`. `order` must be a permutation of `0..dims.len()`.
pub fn permute_subsystems(
    m: &ComplexMatrix,
    dims: &[usize],
    order: &[usize],
) -> Result<ComplexMatrix> {
    let total = check_dims(m, dims)?;
    if order.len() != dims.len() {
        return Err(CoreError::structural("permutation length must match register count"));
    }
    check_subset(dims, order)?;
    let n = dims.len();
    let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
    let mut out = ComplexMatrix::zeros(total, total);
    let mut nr = vec![0usize; n];
    let mut nc = vec![0usize; n];
    let mut or_ = vec![0usize; n];
    let mut oc = vec![0usize; n];
    for r in 0..total {
        decompose(r, &new_dims, &mut nr);
        for c in 0..total {
            decompose(c, &new_dims, &mut nc);
            for k in 0..n {
                or_[order[k]] = nr[k];
                oc[order[k]] = nc[k];
            }
            out.set(r, c, m.get(compose(&or_, dims), compose(&oc, dims)));
        }
    }
    Ok(out)
}

/// Embeds `op` acting on register `site` as identity elsewhere.
pub fn embed_local(op: &ComplexMatrix, dims: &[usize], site: usize) -> Result<ComplexMatrix> {
    if site >= dims.len() {
        return Err(CoreError::structural(format!(
            "site {} out of range for {} registers",
            site,
            dims.len()
        )));
    }
    if !op.is_square() || op.rows != dims[site] {
        return Err(CoreError::structural(format!(
            "operator dimension {} does not match register dimension {}",
            op.rows, dims[site]
        )));
    }
    let before: usize = dims[..site].iter().product();
    let after: usize = dims[site + 1..].iter().product();
    let mut out = ComplexMatrix::identity(before).tensor(op);
    if after > 1 {
        out = out.tensor(&ComplexMatrix::identity(after));
    }
    Ok(out)
}

/// Expectation value `<v| M |v>` as a complex number.
pub fn expectation(m: &ComplexMatrix, v: &[Complex64]) -> Complex64 {
    crate::matrix::inner(v, &m.apply(v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::ONE;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Small deterministic pseudo-random matrix, independent of the sampling
    // module, so these oracles have no dependency above this layer.
    fn scrambled(dim: usize, seed: u64) -> ComplexMatrix {
        let mut state = seed.wrapping_mul(2862933555777941757).wrapping_add(3037000493);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        ComplexMatrix::from_fn(dim, dim, |_, _| Complex64::new(next(), next()))
    }

    // Independent bipartite oracle: out[i][j] = sum_k m[(i,k),(j,k)].
    fn trace_out_second_oracle(m: &ComplexMatrix, da: usize, db: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).map(|k| m.get(i * db + k, j * db + k)).sum()
        })
    }

    // Independent bipartite oracle: out[i][j] = sum_k m[(k,i),(k,j)].
    fn trace_out_first_oracle(m: &ComplexMatrix, da: usize, db: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(db, db, |i, j| {
            (0..da).map(|k| m.get(k * db + i, k * db + j)).sum()
        })
    }

    #[test]
    fn partial_trace_matches_bipartite_oracles() {
        for (da, db, seed) in [(2, 2, 1u64), (2, 3, 2), (3, 2, 3), (3, 4, 4)] {
            let m = scrambled(da * db, seed);
            let dims = [da, db];
            let got_a = partial_trace(&m, &dims, 1).unwrap();
            let got_b = partial_trace(&m, &dims, 0).unwrap();
            assert!(got_a.approx_eq(&trace_out_second_oracle(&m, da, db), 1e-13));
            assert!(got_b.approx_eq(&trace_out_first_oracle(&m, da, db), 1e-13));
        }
    }

    #[test]
    fn partial_trace_of_kron_factorizes() {
        let a = scrambled(3, 10);
        let b = scrambled(2, 11);
        let m = a.tensor(&b);
        let ta = partial_trace(&m, &[3, 2], 1).unwrap();
        let tb = partial_trace(&m, &[3, 2], 0).unwrap();
        assert!(ta.approx_eq(&a.scale(b.trace()), 1e-12));
        assert!(tb.approx_eq(&b.scale(a.trace()), 1e-12));
    }

    #[test]
    fn tripartite_trace_composes_with_single_drops() {
        let m = scrambled(2 * 3 * 2, 21);
        let dims = [2, 3, 2];
        let both = partial_trace_subset(&m, &dims, &[0, 2]).unwrap();
        let step1 = partial_trace(&m, &dims, 2).unwrap();
        let step2 = partial_trace(&step1, &[2, 3], 0).unwrap();
        assert!(both.approx_eq(&step2, 1e-12));
        let full: Complex64 = m.trace();
        assert!((both.trace() - full).norm() < 1e-12);
    }

    #[test]
    fn partial_trace_rejects_bad_input() {
        let m = scrambled(6, 5);
        assert!(partial_trace(&m, &[2, 2], 0).is_err());
        assert!(partial_trace(&m, &[2, 3], 2).is_err());
        assert!(partial_trace_subset(&m, &[2, 3], &[0, 0]).is_err());
        assert!(partial_trace_subset(&m, &[2, 3], &[0, 1]).is_err());
    }

    #[test]
    fn partial_transpose_of_kron_transposes_factor() {
        let a = scrambled(2, 31);
        let b = scrambled(3, 32);
        let m = a.tensor(&b);
        let ptb = partial_transpose(&m, &[2, 3], 1).unwrap();
        assert!(ptb.approx_eq(&a.tensor(&b.transpose()), 1e-13));
        let pta = partial_transpose(&m, &[2, 3], 0).unwrap();
        assert!(pta.approx_eq(&a.transpose().tensor(&b), 1e-13));
    }

    #[test]
    fn partial_transpose_is_involutive_and_full_subset_is_transpose() {
        let m = scrambled(12, 41);
        let dims = [2, 3, 2];
        let once = partial_transpose_subset(&m, &dims, &[1]).unwrap();
        let twice = partial_transpose_subset(&once, &dims, &[1]).unwrap();
        assert!(twice.approx_eq(&m, 1e-14));
        let all = partial_transpose_subset(&m, &dims, &[0, 1, 2]).unwrap();
        assert!(all.approx_eq(&m.transpose(), 1e-14));
    }

    #[test]
    fn partial_transpose_commutes_with_trace_of_other_register() {
        let m = scrambled(6, 51);
        let dims = [2, 3];
        let pt = partial_transpose(&m, &dims, 0).unwrap();
        let left = partial_trace(&pt, &dims, 1).unwrap();
        let right = partial_trace(&m, &dims, 1).unwrap().transpose();
        assert!(left.approx_eq(&right, 1e-13));
    }

    #[test]
    fn permute_swaps_kron_factors() {
        let a = scrambled(2, 61);
        let b = scrambled(3, 62);
        let m = a.tensor(&b);
        let swapped = permute_subsystems(&m, &[2, 3], &[1, 0]).unwrap();
        assert!(swapped.approx_eq(&b.tensor(&a), 1e-13));
    }

    #[test]
    fn permute_roundtrips_through_inverse() {
        let m = scrambled(2 * 2 * 3, 71);
        let dims = [2, 2, 3];
        let order = [2, 0, 1];
        let new_dims: Vec<usize> = order.iter().map(|&o| dims[o]).collect();
        let mut inverse = [0usize; 3];
        for (k, &o) in order.iter().enumerate() {
            inverse[o] = k;
        }
        let there = permute_subsystems(&m, &dims, &order).unwrap();
        let back = permute_subsystems(&there, &new_dims, &inverse).unwrap();
        assert!(back.approx_eq(&m, 1e-14));
    }

    #[test]
    fn embed_local_matches_explicit_kron() {
        let op = scrambled(3, 81);
        let dims = [2, 3, 2];
        let embedded = embed_local(&op, &dims, 1).unwrap();
        let expected = ComplexMatrix::identity(2)
            .tensor(&op)
            .tensor(&ComplexMatrix::identity(2));
        assert!(embedded.approx_eq(&expected, 1e-15));
        let first = embed_local(&op, &[3, 4], 0).unwrap();
        assert!(first.approx_eq(&op.tensor(&ComplexMatrix::identity(4)), 1e-15));
    }

    #[test]
    fn expectation_reads_diagonal_in_basis() {
        let mut m = ComplexMatrix::zeros(2, 2);
        m.set(0, 0, c(0.25, 0.0));
        m.set(1, 1, c(0.75, 0.0));
        let v0 = crate::matrix::basis_vector(2, 0);
        assert!((expectation(&m, &v0) - c(0.25, 0.0)).norm() < 1e-15);
        let plus = crate::matrix::normalize(&[ONE, ONE]);
        assert!((expectation(&m, &plus) - c(0.5, 0.0)).norm() < 1e-15);
    }
}
