//! Partial-pivot LU factorization over the complex field.
//!
//! All inverse applications in the toolkit route through this factorization;
//! no code path forms an explicit matrix inverse.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::matrix::ComplexMatrix;

/// Pivot magnitudes at or below this are treated as exact singularity.
const PIVOT_FLOOR: f64 = 1e-300;

/// LU factors of a square matrix with row pivoting: `P A = L U`.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    // Combined L (below diagonal, unit diagonal implicit) and U (diagonal
    // and above), after row permutation.
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    pub fn factor(a: &ComplexMatrix) -> Result<Self> {
        a.ensure_square()?;
        a.ensure_finite()?;
        let n = a.rows();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let mut pivot_row = k;
            let mut pivot_mag = lu[(k, k)].norm();
            for i in (k + 1)..n {
                let mag = lu[(i, k)].norm();
                if mag > pivot_mag {
                    pivot_mag = mag;
                    pivot_row = i;
                }
            }
            if pivot_mag <= PIVOT_FLOOR {
                return Err(CoreError::Singular);
            }
            if pivot_row != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(pivot_row, j)];
                    lu[(pivot_row, j)] = tmp;
                }
                perm.swap(k, pivot_row);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let factor = lu[(i, k)] / pivot;
                lu[(i, k)] = factor;
                for j in (k + 1)..n {
                    let sub = factor * lu[(k, j)];
                    lu[(i, j)] -= sub;
                }
            }
        }

        Ok(LuFactors { n, lu, perm })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Solve `A x = b` for one right-hand side.
    pub fn solve_vec(&self, b: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(b.len(), self.n, "rhs length mismatch");
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        // Forward substitution with unit lower triangle.
        for i in 1..self.n {
            for j in 0..i {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
        }
        // Back substitution with upper triangle.
        for i in (0..self.n).rev() {
            for j in (i + 1)..self.n {
                let sub = self.lu[(i, j)] * x[j];
                x[i] -= sub;
            }
            x[i] /= self.lu[(i, i)];
        }
        x
    }

    /// Solve `A X = B` column by column.
    pub fn solve_matrix(&self, b: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(b.rows(), self.n, "rhs row count mismatch");
        let mut out = ComplexMatrix::zeros(self.n, b.cols());
        for j in 0..b.cols() {
            let col: Vec<Complex64> = (0..self.n).map(|i| b[(i, j)]).collect();
            let x = self.solve_vec(&col);
            for i in 0..self.n {
                out[(i, j)] = x[i];
            }
        }
        out
    }
}

/// Convenience wrapper: factor then solve `A X = B`.
pub fn solve(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(LuFactors::factor(a)?.solve_matrix(b))
}
