//! Time-dependent Hermitian coefficient families `H_k(t)`.
//!
//! Each space variable `zeta_k` carries one Hermitian `m x m` coefficient.
//! Two families mirror the closed-form constructions (a constant signature
//! matrix shared by every axis, and rank-one orthogonal projectors built
//! from orthonormal rows); the other two cover general constant and
//! polynomial-in-time coefficients.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::matrix::{hermitian_eigenvalues, ComplexMatrix};
use crate::tol::Tolerances;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianFamily {
    /// `H_k(t) = diag(I_{m1}, -I_{m2})` for every axis.
    ConstantSignature { m1: usize, m2: usize },
    /// `H_k(t) = beta_k* beta_k` where `beta_k` is row k of `beta` and the
    /// rows are orthonormal.
    OrthoProjectors { beta: ComplexMatrix },
    /// One fixed Hermitian matrix per axis.
    ConstantHermitian { matrices: Vec<ComplexMatrix> },
    /// `H_k(t) = sum_d coefficients[k][d] t^d` with Hermitian coefficients.
    PolynomialHermitian {
        coefficients: Vec<Vec<ComplexMatrix>>,
    },
}

impl HamiltonianFamily {
    /// Check the family against the signal dimension `m` and axis count `r`.
    pub fn validate(&self, m: usize, r: usize, tol: &Tolerances) -> Result<()> {
        match self {
            HamiltonianFamily::ConstantSignature { m1, m2 } => {
                if m1 + m2 != m {
                    return Err(CoreError::DimensionMismatch {
                        context: format!(
                            "signature blocks {m1}+{m2} do not fill the signal dimension {m}"
                        ),
                    });
                }
                Ok(())
            }
            HamiltonianFamily::OrthoProjectors { beta } => {
                if beta.rows() != r || beta.cols() != m {
                    return Err(CoreError::DimensionMismatch {
                        context: format!(
                            "beta is {}x{}, expected one row per axis ({r}) and {m} columns",
                            beta.rows(),
                            beta.cols()
                        ),
                    });
                }
                beta.ensure_finite()?;
                let gram = &(beta * &beta.adjoint()) - &ComplexMatrix::identity(r);
                let deviation = gram.frobenius_norm();
                if deviation > tol.unitarity {
                    return Err(CoreError::NotOrthonormal {
                        deviation,
                        tolerance: tol.unitarity,
                    });
                }
                Ok(())
            }
            HamiltonianFamily::ConstantHermitian { matrices } => {
                if matrices.len() != r {
                    return Err(CoreError::DimensionMismatch {
                        context: format!("{} coefficient matrices for {r} axes", matrices.len()),
                    });
                }
                for h in matrices {
                    check_hermitian_coefficient(h, m, tol)?;
                }
                Ok(())
            }
            HamiltonianFamily::PolynomialHermitian { coefficients } => {
                if coefficients.len() != r {
                    return Err(CoreError::DimensionMismatch {
                        context: format!("{} coefficient lists for {r} axes", coefficients.len()),
                    });
                }
                for list in coefficients {
                    if list.is_empty() {
                        return Err(CoreError::DimensionMismatch {
                            context: "polynomial coefficient list is empty".into(),
                        });
                    }
                    for h in list {
                        check_hermitian_coefficient(h, m, tol)?;
                    }
                }
                Ok(())
            }
        }
    }

    /// `H_k(t)`. The result is Hermitian by construction for every family.
    pub fn hamiltonian(&self, k: usize, t: f64) -> Result<ComplexMatrix> {
        match self {
            HamiltonianFamily::ConstantSignature { m1, m2 } => {
                let m = m1 + m2;
                Ok(ComplexMatrix::from_fn(m, m, |i, j| {
                    if i != j {
                        Complex64::new(0.0, 0.0)
                    } else if i < *m1 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::new(-1.0, 0.0)
                    }
                }))
            }
            HamiltonianFamily::OrthoProjectors { beta } => {
                if k >= beta.rows() {
                    return Err(CoreError::AxisOutOfRange { k, r: beta.rows() });
                }
                let row = ComplexMatrix::from_fn(1, beta.cols(), |_, j| beta[(k, j)]);
                Ok(&row.adjoint() * &row)
            }
            HamiltonianFamily::ConstantHermitian { matrices } => {
                matrices.get(k).cloned().ok_or(CoreError::AxisOutOfRange {
                    k,
                    r: matrices.len(),
                })
            }
            HamiltonianFamily::PolynomialHermitian { coefficients } => {
                let list = coefficients.get(k).ok_or(CoreError::AxisOutOfRange {
                    k,
                    r: coefficients.len(),
                })?;
                let m = list[0].rows();
                let mut out = ComplexMatrix::zeros(m, m);
                let mut power = 1.0;
                for coeff in list {
                    out = &out + &coeff.scale_re(power);
                    power *= t;
                }
                Ok(out)
            }
        }
    }

    /// All `r` coefficients at time `t`.
    pub fn hamiltonians(&self, r: usize, t: f64) -> Result<Vec<ComplexMatrix>> {
        (0..r).map(|k| self.hamiltonian(k, t)).collect()
    }

    /// True when every `H_k(t)` is positive semidefinite up to `slack` at
    /// the given time.
    pub fn positive_semidefinite_at(&self, r: usize, t: f64, slack: f64) -> Result<bool> {
        for k in 0..r {
            let h = self.hamiltonian(k, t)?;
            let eigs = hermitian_eigenvalues(&h)?;
            if let Some(min) = eigs.first() {
                if *min < -slack {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }
}

fn check_hermitian_coefficient(h: &ComplexMatrix, m: usize, tol: &Tolerances) -> Result<()> {
    if h.rows() != m || h.cols() != m {
        return Err(CoreError::DimensionMismatch {
            context: format!(
                "coefficient matrix is {}x{}, signal dimension is {m}",
                h.rows(),
                h.cols()
            ),
        });
    }
    h.ensure_finite()?;
    let bound = tol.hermitian_asymmetry * (1.0 + h.frobenius_norm());
    let asymmetry = h.asymmetry();
    if asymmetry > bound {
        return Err(CoreError::NotHermitian {
            asymmetry,
            tolerance: bound,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn signature_family_is_constant_diagonal() {
        let f = HamiltonianFamily::ConstantSignature { m1: 1, m2: 1 };
        f.validate(2, 3, &Tolerances::default()).unwrap();
        for k in 0..3 {
            for &t in &[0.0, 0.7, -2.0] {
                let h = f.hamiltonian(k, t).unwrap();
                let want = ComplexMatrix::diagonal(&[c(1.0, 0.0), c(-1.0, 0.0)]);
                assert_eq!(h.distance(&want), 0.0);
            }
        }
    }

    #[test]
    fn signature_blocks_must_fill_signal_dimension() {
        let f = HamiltonianFamily::ConstantSignature { m1: 2, m2: 2 };
        assert!(f.validate(3, 1, &Tolerances::default()).is_err());
    }

    #[test]
    fn identity_rows_give_coordinate_projectors() {
        let f = HamiltonianFamily::OrthoProjectors {
            beta: ComplexMatrix::identity(2),
        };
        f.validate(2, 2, &Tolerances::default()).unwrap();
        let h0 = f.hamiltonian(0, 0.3).unwrap();
        let h1 = f.hamiltonian(1, 0.3).unwrap();
        assert_eq!(
            h0.distance(&ComplexMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 0.0)])),
            0.0
        );
        assert_eq!(
            h1.distance(&ComplexMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)])),
            0.0
        );
    }

    #[test]
    fn hadamard_row_projector() {
        let s = 1.0 / 2.0f64.sqrt();
        let beta = ComplexMatrix::from_rows(vec![
            vec![c(s, 0.0), c(s, 0.0)],
            vec![c(s, 0.0), c(-s, 0.0)],
        ])
        .unwrap();
        let f = HamiltonianFamily::OrthoProjectors { beta };
        f.validate(2, 2, &Tolerances::default()).unwrap();
        let h0 = f.hamiltonian(0, 0.0).unwrap();
        let want = ComplexMatrix::from_rows(vec![
            vec![c(0.5, 0.0), c(0.5, 0.0)],
            vec![c(0.5, 0.0), c(0.5, 0.0)],
        ])
        .unwrap();
        assert!(h0.distance(&want) < 1e-15);
        // A projector squares to itself.
        assert!((&h0 * &h0).distance(&h0) < 1e-15);
    }

    #[test]
    fn non_orthonormal_rows_rejected() {
        let beta = ComplexMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(0.0, 0.0)],
            vec![c(1.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let f = HamiltonianFamily::OrthoProjectors { beta };
        assert!(matches!(
            f.validate(2, 2, &Tolerances::default()),
            Err(CoreError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn constant_family_returns_given_matrices() {
        let h0 = ComplexMatrix::from_rows(vec![
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(1.0, 0.0)],
        ])
        .unwrap();
        let f = HamiltonianFamily::ConstantHermitian {
            matrices: vec![h0.clone()],
        };
        f.validate(2, 1, &Tolerances::default()).unwrap();
        assert_eq!(f.hamiltonian(0, 5.0).unwrap().distance(&h0), 0.0);
        assert!(matches!(
            f.hamiltonian(1, 0.0),
            Err(CoreError::AxisOutOfRange { k: 1, r: 1 })
        ));
    }

    #[test]
    fn non_hermitian_coefficient_rejected() {
        let bad = ComplexMatrix::from_rows(vec![
            vec![c(0.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0)],
        ])
        .unwrap();
        let f = HamiltonianFamily::ConstantHermitian {
            matrices: vec![bad],
        };
        assert!(matches!(
            f.validate(2, 1, &Tolerances::default()),
            Err(CoreError::NotHermitian { .. })
        ));
    }

    #[test]
    fn polynomial_family_evaluates_in_t() {
        let a0 = ComplexMatrix::identity(1);
        let a1 = ComplexMatrix::scalar(c(2.0, 0.0));
        let f = HamiltonianFamily::PolynomialHermitian {
            coefficients: vec![vec![a0, a1]],
        };
        f.validate(1, 1, &Tolerances::default()).unwrap();
        // H(2) = 1 + 2*2 = 5
        let h = f.hamiltonian(0, 2.0).unwrap();
        assert!((h[(0, 0)] - c(5.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn psd_probe_distinguishes_families() {
        let sig = HamiltonianFamily::ConstantSignature { m1: 1, m2: 1 };
        assert!(!sig.positive_semidefinite_at(1, 0.0, 1e-12).unwrap());
        let proj = HamiltonianFamily::OrthoProjectors {
            beta: ComplexMatrix::identity(2),
        };
        assert!(proj.positive_semidefinite_at(2, 0.0, 1e-12).unwrap());
    }

    #[test]
    fn serde_round_trip_keeps_variant() {
        let f = HamiltonianFamily::ConstantSignature { m1: 2, m2: 1 };
        let s = serde_json::to_string(&f).unwrap();
        assert_eq!(s, r#"{"constant_signature":{"m1":2,"m2":1}}"#);
        let back: HamiltonianFamily = serde_json::from_str(&s).unwrap();
        assert!(matches!(
            back,
            HamiltonianFamily::ConstantSignature { m1: 2, m2: 1 }
        ));
    }
}
