//! Hermitian eigendecomposition via cyclic Jacobi rotations with complex
//! phase reduction, and the trace norm built on top of it.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::matrix::{ComplexMatrix, ZERO};

/// Largest tolerated `max |A - A^dagger|` before a matrix is rejected as
/// non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Off-diagonal Frobenius norm at which the Jacobi sweep stops, relative to
/// the Frobenius norm of the input (floored at 1).
const JACOBI_OFF_TOL: f64 = 1e-13;

const MAX_SWEEPS: usize = 64;

/// Eigenvalues in descending order with matching orthonormal eigenvectors.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    eigenvalues: Vec<f64>,
    /// Column `k` is the eigenvector for `eigenvalues[k]`.
    eigenvectors: ComplexMatrix,
}

impl HermitianSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> Vec<Complex64> {
        self.eigenvectors.column(k)
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn min_eigenvalue(&self) -> f64 {
        *self.eigenvalues.last().expect("spectrum is never empty")
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Rebuilds `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.apply_fn(|x| x)
    }

    /// Builds `V diag(f(lambda)) V^dagger` for a real spectral function `f`.
    pub fn apply_fn(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let d = self.dim();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            let fk = f(self.eigenvalues[k]);
            if fk == 0.0 {
                continue;
            }
            for r in 0..d {
                let vr = v.get(r, k);
                for c in 0..d {
                    let add = vr * v.get(c, k).conj() * fk;
                    let cur = out.get(r, c);
                    out.set(r, c, cur + add);
                }
            }
        }
        out
    }
}

fn off_diagonal_norm(h: &ComplexMatrix) -> f64 {
    let d = h.rows;
    let mut acc = 0.0;
    for r in 0..d {
        for c in 0..d {
            if r != c {
                acc += h.get(r, c).norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Diagonalizes a Hermitian matrix. Rejects input whose Hermitian defect
/// exceeds [`HERMITIAN_TOL`]; rounding noise below that is scrubbed first.
pub fn hermitian_eigensystem(a: &ComplexMatrix) -> Result<HermitianSpectrum> {
    if !a.is_square() {
        return Err(CoreError::structural("eigendecomposition needs a square matrix"));
    }
    let defect = a.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(CoreError::contract(format!(
            "matrix is not Hermitian: defect {:.3e} exceeds {:.1e}",
            defect, HERMITIAN_TOL
        )));
    }
    let d = a.rows;
    let mut h = a.hermitian_part();
    let mut v = ComplexMatrix::identity(d);
    let stop = JACOBI_OFF_TOL * h.frobenius_norm().max(1.0);

    let mut sweeps = 0;
    while off_diagonal_norm(&h) > stop {
        if sweeps >= MAX_SWEEPS {
            return Err(CoreError::convergence(format!(
                "Jacobi sweep limit {} reached with off-diagonal norm {:.3e}",
                MAX_SWEEPS,
                off_diagonal_norm(&h)
            )));
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut h, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        h.get(j, j)
            .re
            .partial_cmp(&h.get(i, i).re)
            .expect("eigenvalues are finite")
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| h.get(k, k).re).collect();
    let eigenvectors = ComplexMatrix::from_fn(d, d, |r, c| v.get(r, order[c]));
    Ok(HermitianSpectrum {
        eigenvalues,
        eigenvectors,
    })
}

/// One Jacobi rotation zeroing `h[p][q]`. The complex pivot `r e^{i theta}`
/// is first reduced to the real value `r` by the phase `diag(1, e^{-i theta})`
/// on the `(p, q)` plane, then a real two-sided rotation is applied. Both are
/// folded into a single unitary `G`; updates keep `h` Hermitian and accumulate
/// `v <- v G`.
fn rotate(h: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let pivot = h.get(p, q);
    let r = pivot.norm();
    if r == 0.0 {
        return;
    }
    let phase = pivot / r;
    let a = h.get(p, p).re;
    let b = h.get(q, q).re;
    let tau = (b - a) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // G restricted to the (p, q) plane, with phase = e^{i theta}:
    //   G_pp = c          G_pq = s
    //   G_qp = -s / phase G_qq = c / phase
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = -Complex64::new(s, 0.0) * phase.conj();
    let g_qq = Complex64::new(c, 0.0) * phase.conj();

    let d = h.rows;
    for k in 0..d {
        if k == p || k == q {
            continue;
        }
        let hkp = h.get(k, p);
        let hkq = h.get(k, q);
        let new_kp = hkp * g_pp + hkq * g_qp;
        let new_kq = hkp * g_pq + hkq * g_qq;
        h.set(k, p, new_kp);
        h.set(p, k, new_kp.conj());
        h.set(k, q, new_kq);
        h.set(q, k, new_kq.conj());
    }
    h.set(p, p, Complex64::new(a - t * r, 0.0));
    h.set(q, q, Complex64::new(b + t * r, 0.0));
    h.set(p, q, ZERO);
    h.set(q, p, ZERO);

    for k in 0..d {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * g_pp + vkq * g_qp);
        v.set(k, q, vkp * g_pq + vkq * g_qq);
    }
}

/// Sum of singular values. Hermitian input uses its eigenvalues directly;
/// otherwise the singular values are the root eigenvalues of `A^dagger A`.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    if !a.is_square() {
        return Err(CoreError::structural("trace norm needs a square matrix"));
    }
    if a.hermitian_defect() <= HERMITIAN_TOL {
        let spec = hermitian_eigensystem(a)?;
        return Ok(spec.eigenvalues().iter().map(|x| x.abs()).sum());
    }
    let gram = a.adjoint().matmul(a);
    let spec = hermitian_eigensystem(&gram)?;
    Ok(spec
        .eigenvalues()
        .iter()
        .map(|&x| x.max(0.0).sqrt())
        .sum())
}
