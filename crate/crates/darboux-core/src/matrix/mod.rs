//! Dense complex matrices and the numerical kernels built on them.
//!
//! Everything downstream works at desk scale (dimensions up to a few tens),
//! so the storage is a flat row-major `Vec<Complex64>` and the kernels are
//! direct dense algorithms: partial-pivot LU, a fixed 13th-order rational
//! approximation for the matrix exponential, cyclic Jacobi for Hermitian
//! eigenvalues and a shifted Hessenberg QR iteration for general spectra.

mod eig;
mod expm;
mod lu;
mod sylvester;

pub use eig::{condition_estimate, hermitian_eigenvalues, spectrum};
pub use expm::expm;
pub use lu::{solve, LuFactors};
pub use sylvester::{resolvent, solve_sylvester, sylvester_residual};

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// Dense complex matrix in row-major order.
#[derive(Debug, Clone)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ComplexMatrix {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        ComplexMatrix {
            rows,
            cols,
            entries,
        }
    }

    /// Build from a rectangular row list, rejecting ragged rows and
    /// non-finite entries.
    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut entries = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != ncols {
                return Err(CoreError::RaggedRows {
                    row: i,
                    got: row.len(),
                    expected: ncols,
                });
            }
            entries.extend_from_slice(row);
        }
        let m = ComplexMatrix {
            rows: nrows,
            cols: ncols,
            entries,
        };
        m.ensure_finite()?;
        Ok(m)
    }

    pub fn diagonal(entries: &[Complex64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    /// 1x1 matrix, convenient for scalar cases.
    pub fn scalar(value: Complex64) -> Self {
        ComplexMatrix {
            rows: 1,
            cols: 1,
            entries: vec![value],
        }
    }

    /// Column vector from a slice.
    pub fn column(entries: &[Complex64]) -> Self {
        ComplexMatrix {
            rows: entries.len(),
            cols: 1,
            entries: entries.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn ensure_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(CoreError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(())
    }

    pub fn ensure_finite(&self) -> Result<()> {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self[(i, j)];
                if !e.re.is_finite() || !e.im.is_finite() {
                    return Err(CoreError::NonFinite { row: i, col: j });
                }
            }
        }
        Ok(())
    }

    pub fn conjugate(&self) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e = e.conj();
        }
        out
    }

    /// Conjugate transpose `M*`.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Hermitian part `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Self {
        debug_assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self[(i, j)] + self[(j, i)].conj()) * 0.5
        })
    }

    /// Frobenius norm of `M - M*`.
    pub fn asymmetry(&self) -> f64 {
        debug_assert!(self.is_square());
        let mut sum = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                sum += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        sum.sqrt()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|e| e.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut best = 0.0f64;
        for j in 0..self.cols {
            let s: f64 = (0..self.rows).map(|i| self[(i, j)].norm()).sum();
            best = best.max(s);
        }
        best
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        for e in &mut out.entries {
            *e *= s;
        }
        out
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    /// `M + s I`.
    pub fn add_scaled_identity(&self, s: Complex64) -> Self {
        debug_assert!(self.is_square());
        let mut out = self.clone();
        for i in 0..self.rows {
            out[(i, i)] += s;
        }
        out
    }

    /// Columns `[lo, hi)` as a new matrix.
    pub fn column_block(&self, lo: usize, hi: usize) -> Self {
        assert!(lo <= hi && hi <= self.cols, "column block out of range");
        Self::from_fn(self.rows, hi - lo, |i, j| self[(i, lo + j)])
    }

    /// Horizontal concatenation.
    pub fn hstack(blocks: &[&ComplexMatrix]) -> Result<Self> {
        let rows = blocks.first().map_or(0, |b| b.rows);
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        for b in blocks {
            if b.rows != rows {
                return Err(CoreError::DimensionMismatch {
                    context: format!(
                        "hstack expects equal row counts, got {} and {}",
                        rows, b.rows
                    ),
                });
            }
        }
        let mut out = Self::zeros(rows, cols);
        let mut off = 0;
        for b in blocks {
            for i in 0..rows {
                for j in 0..b.cols {
                    out[(i, off + j)] = b[(i, j)];
                }
            }
            off += b.cols;
        }
        Ok(out)
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &ComplexMatrix) -> Self {
        let (p, q) = (other.rows, other.cols);
        Self::from_fn(self.rows * p, self.cols * q, |i, j| {
            self[(i / p, j / q)] * other[(i % p, j % q)]
        })
    }

    /// Column-major stacking of the entries (the `vec` operator).
    pub fn vec_columns(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    /// Inverse of [`ComplexMatrix::vec_columns`] for a known shape.
    pub fn from_vec_columns(rows: usize, cols: usize, v: &[Complex64]) -> Self {
        assert_eq!(v.len(), rows * cols, "vec length mismatch");
        Self::from_fn(rows, cols, |i, j| v[j * rows + i])
    }

    /// Matrix product; panics on shape mismatch (callers validate shapes at
    /// their boundaries).
    pub fn matmul(&self, other: &ComplexMatrix) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn matvec(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Frobenius distance to another matrix of the same shape.
    pub fn distance(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.cols, other.cols);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, other.rows, "add shape mismatch");
        assert_eq!(self.cols, other.cols, "add shape mismatch");
        let mut out = self.clone();
        for (e, o) in out.entries.iter_mut().zip(&other.entries) {
            *e += o;
        }
        out
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, other: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.rows, other.rows, "sub shape mismatch");
        assert_eq!(self.cols, other.cols, "sub shape mismatch");
        let mut out = self.clone();
        for (e, o) in out.entries.iter_mut().zip(&other.entries) {
            *e -= o;
        }
        out
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_re(-1.0)
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, other: &ComplexMatrix) -> ComplexMatrix {
        self.matmul(other)
    }
}

impl fmt::Display for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            for j in 0..self.cols {
                let e = self[(i, j)];
                if j > 0 {
                    write!(f, "  ")?;
                }
                write!(f, "{:+.6e}{:+.6e}i", e.re, e.im)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

// Wire format: a matrix is a list of rows, each entry a [re, im] pair.
impl Serialize for ComplexMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.rows))?;
        for i in 0..self.rows {
            let row: Vec<[f64; 2]> = (0..self.cols)
                .map(|j| [self[(i, j)].re, self[(i, j)].im])
                .collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ComplexMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct MatrixVisitor;

        impl<'de> Visitor<'de> for MatrixVisitor {
            type Value = ComplexMatrix;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a list of rows of [re, im] pairs")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<ComplexMatrix, A::Error> {
                let mut rows: Vec<Vec<Complex64>> = Vec::new();
                while let Some(row) = seq.next_element::<Vec<[f64; 2]>>()? {
                    rows.push(
                        row.into_iter()
                            .map(|[re, im]| Complex64::new(re, im))
                            .collect(),
                    );
                }
                ComplexMatrix::from_rows(rows).map_err(de::Error::custom)
            }
        }

        deserializer.deserialize_seq(MatrixVisitor)
    }
}

/// A matrix accepted as Hermitian: carries the symmetrized matrix
/// `(M + M*)/2` and the Frobenius asymmetry of the original input.
///
/// Hermitian data entering through files or derivations is passed through a
/// certificate before use, so Hermiticity cannot drift across round-trips.
#[derive(Debug, Clone)]
pub struct HermitianCertificate {
    matrix: ComplexMatrix,
    asymmetry: f64,
}

impl HermitianCertificate {
    pub fn new(m: &ComplexMatrix, tolerance: f64) -> Result<Self> {
        m.ensure_square()?;
        m.ensure_finite()?;
        let asymmetry = m.asymmetry();
        if asymmetry > tolerance {
            return Err(CoreError::NotHermitian {
                asymmetry,
                tolerance,
            });
        }
        Ok(HermitianCertificate {
            matrix: m.hermitian_part(),
            asymmetry,
        })
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }
}
