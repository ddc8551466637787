//! Resolvents and the Sylvester equation `A X - X A* = Q`.
//!
//! The solver vectorizes to the Kronecker system
//! `(I (x) A - conj(A) (x) I) vec(X) = vec(Q)` (column-major `vec`) and runs
//! partial-pivot LU on the n^2 x n^2 matrix. That is O(n^6) work, which is
//! the right trade at desk scale: state dimensions stay in the tens, and the
//! dense route has no spectral preconditions beyond solvability itself.
//!
//! Solvability needs `sigma(A)` and `sigma(A*)` disjoint, i.e. no pair of
//! eigenvalues with `lambda_i = conj(lambda_j)`. The solver checks that gap
//! up front and the residual afterwards, so a returned solution is always a
//! verified one.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::matrix::{lu, ComplexMatrix};
use crate::tol::Tolerances;

/// Resolvent `(A - c I)^{-1}` as an explicit matrix.
///
/// Resolvents enter products and exponentials downstream, so they are one of
/// the few places an inverse is materialized rather than applied.
pub fn resolvent(a: &ComplexMatrix, c: Complex64) -> Result<ComplexMatrix> {
    a.ensure_square()?;
    let shifted = a.add_scaled_identity(-c);
    lu::solve(&shifted, &ComplexMatrix::identity(a.rows()))
}

/// Frobenius residual `||A X - X A* - Q||_F`.
pub fn sylvester_residual(a: &ComplexMatrix, x: &ComplexMatrix, q: &ComplexMatrix) -> f64 {
    let lhs = &(a * x) - &(x * &a.adjoint());
    lhs.distance(q)
}

/// Solve `A X - X A* = Q` for X.
pub fn solve_sylvester(
    a: &ComplexMatrix,
    q: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    a.ensure_square()?;
    q.ensure_square()?;
    a.ensure_finite()?;
    q.ensure_finite()?;
    let n = a.rows();
    if q.rows() != n {
        return Err(CoreError::DimensionMismatch {
            context: format!(
                "sylvester right-hand side is {}x{}, state matrix is {}x{}",
                q.rows(),
                q.cols(),
                n,
                n
            ),
        });
    }

    let eigs = super::eig::spectrum(a)?;
    let mut gap = f64::INFINITY;
    for li in &eigs {
        for lj in &eigs {
            gap = gap.min((li - lj.conj()).norm());
        }
    }
    if gap <= tol.spectral_gap {
        return Err(CoreError::SpectralGap {
            context: "sylvester operator is singular or near-singular: \
                      an eigenvalue of A nearly equals the conjugate of another"
                .into(),
            distance: gap,
            threshold: tol.spectral_gap,
        });
    }

    let ident = ComplexMatrix::identity(n);
    let big = &ident.kron(a) - &a.conjugate().kron(&ident);
    let rhs = q.vec_columns();
    let factors = lu::LuFactors::factor(&big)?;
    let xvec = factors.solve_vec(&rhs);
    let x = ComplexMatrix::from_vec_columns(n, n, &xvec);

    let residual = sylvester_residual(a, &x, q);
    let bound = tol.sylvester_bound(q.frobenius_norm());
    if residual > bound {
        return Err(CoreError::SylvesterResidual { residual, bound });
    }
    Ok(x)
}
