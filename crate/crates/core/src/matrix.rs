//! Dense complex matrices in row-major order, plus the small set of vector
//! helpers used to build states and operators.

use num_complex::Complex64;
use std::ops::{Add, Mul, Sub};

use crate::error::{CoreError, Result};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Dense complex matrix; `entries[r * cols + c]` holds row `r`, column `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Wraps a row-major buffer. `entries.len()` must equal `rows * cols`.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(CoreError::structural("matrix dimensions must be positive"));
        }
        if entries.len() != rows * cols {
            return Err(CoreError::structural(format!(
                "entry buffer holds {} values, expected {}x{}",
                entries.len(),
                rows,
                cols
            )));
        }
        Ok(ComplexMatrix { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = ComplexMatrix::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, ONE);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        ComplexMatrix { rows, cols, entries }
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        debug_assert!(row < self.rows && col < self.cols);
        self.entries[row * self.cols + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: Complex64) {
        debug_assert!(row < self.rows && col < self.cols);
        self.entries[row * self.cols + col] = value;
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn add(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a + b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn sub(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let entries = self
            .entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a - b)
            .collect();
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        }
    }

    pub fn scale(&self, factor: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> ComplexMatrix {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn matmul(&self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = ComplexMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a == ZERO {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + a * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn conj(&self) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|a| a.conj()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.entries.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest entry of `A - A^dagger` in absolute value; zero iff Hermitian.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let mut worst = 0.0f64;
        for r in 0..self.rows {
            for c in r..self.cols {
                let d = (self.get(r, c) - self.get(c, r).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= tol
    }

    /// Largest entry of `A^dagger A - I` in absolute value; zero iff unitary.
    pub fn unitary_defect(&self) -> f64 {
        assert!(self.is_square());
        let gram = self.adjoint().matmul(self);
        gram.sub(&ComplexMatrix::identity(self.rows)).max_abs_entry()
    }

    /// Hermitian part `(A + A^dagger) / 2`, used to scrub rounding noise.
    pub fn hermitian_part(&self) -> ComplexMatrix {
        self.add(&self.adjoint()).scale_re(0.5)
    }

    /// Kronecker product; block `(r, c)` of the result is `self[r][c] * other`.
    pub fn tensor(&self, other: &ComplexMatrix) -> ComplexMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = ComplexMatrix::zeros(rows, cols);
        for r1 in 0..self.rows {
            for c1 in 0..self.cols {
                let a = self.get(r1, c1);
                if a == ZERO {
                    continue;
                }
                for r2 in 0..other.rows {
                    for c2 in 0..other.cols {
                        out.set(
                            r1 * other.rows + r2,
                            c1 * other.cols + c2,
                            a * other.get(r2, c2),
                        );
                    }
                }
            }
        }
        out
    }

    pub fn column(&self, col: usize) -> Vec<Complex64> {
        assert!(col < self.cols);
        (0..self.rows).map(|r| self.get(r, col)).collect()
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| (0..self.cols).map(|c| self.get(r, c) * v[c]).sum())
            .collect()
    }

    pub fn approx_eq(&self, other: &ComplexMatrix, tol: f64) -> bool {
        (self.rows, self.cols) == (other.rows, other.cols)
            && self.sub(other).max_abs_entry() <= tol
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::add(self, rhs)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::sub(self, rhs)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(rhs)
    }
}

/// Computational basis column vector `|k>` in dimension `dim`.
pub fn basis_vector(dim: usize, k: usize) -> Vec<Complex64> {
    assert!(k < dim);
    let mut v = vec![ZERO; dim];
    v[k] = ONE;
    v
}

pub fn vec_tensor(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Hermitian inner product `<a|b>`, conjugate-linear in the first slot.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn vec_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn normalize(v: &[Complex64]) -> Vec<Complex64> {
    let n = vec_norm(v);
    assert!(n > 0.0, "cannot normalize the zero vector");
    v.iter().map(|x| x / n).collect()
}

/// Rank-one operator `|a><b|`.
pub fn outer(a: &[Complex64], b: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(a.len(), b.len(), |r, c| a[r] * b[c].conj())
}

/// Rank-one projector `|v><v|` for a unit vector `v`.
pub fn projector(v: &[Complex64]) -> ComplexMatrix {
    outer(v, v)
}
