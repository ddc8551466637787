//! The dressing data `{A, S(0), Pi(0)}` plus coupling constants, with
//! admission checks.
//!
//! A triple is admissible when S(0) is Hermitian, the displacement identity
//! `A S(0) - S(0) A* = i Pi(0) Pi(0)*` holds at the origin, and the coupling
//! constants are distinct reals off the spectrum of A. Construction goes
//! through [`validate_triple`], so an existing [`GbdtTriple`] always carries
//! verified data and precomputed resolvents `(A - c_k I)^{-1}`.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::matrix::{resolvent, ComplexMatrix};
use crate::tol::Tolerances;

/// One admission condition with its outcome.
#[derive(Debug, Serialize)]
pub struct Diagnostic {
    pub condition: &'static str,
    pub passed: bool,
    pub detail: String,
    #[serde(skip)]
    error: Option<CoreError>,
}

impl Diagnostic {
    fn pass(condition: &'static str, detail: String) -> Self {
        Diagnostic {
            condition,
            passed: true,
            detail,
            error: None,
        }
    }

    fn fail(condition: &'static str, error: CoreError) -> Self {
        Diagnostic {
            condition,
            passed: false,
            detail: error.to_string(),
            error: Some(error),
        }
    }
}

/// Full admission report for a candidate triple.
#[derive(Debug, Serialize)]
pub struct TripleValidation {
    pub diagnostics: Vec<Diagnostic>,
}

impl TripleValidation {
    pub fn is_valid(&self) -> bool {
        self.diagnostics.iter().all(|d| d.passed)
    }

    /// First failure as a typed error, consuming the report.
    pub fn into_first_error(self) -> Option<CoreError> {
        self.diagnostics.into_iter().find_map(|d| d.error)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| !d.passed)
    }
}

/// Check a candidate triple without constructing it.
///
/// Structural problems (shapes, non-finite data) stop the report early
/// because the numeric conditions are not well posed on malformed input.
/// Otherwise every condition is evaluated so a report lists all failures at
/// once.
pub fn validate_triple(
    a: &ComplexMatrix,
    s0: &ComplexMatrix,
    pi0: &ComplexMatrix,
    couplings: &[f64],
    tol: &Tolerances,
) -> TripleValidation {
    let mut diagnostics = Vec::new();

    if let Err(e) = check_shapes(a, s0, pi0, couplings) {
        diagnostics.push(Diagnostic::fail("shapes", e));
        return TripleValidation { diagnostics };
    }
    diagnostics.push(Diagnostic::pass(
        "shapes",
        format!(
            "n = {}, m = {}, r = {}",
            a.rows(),
            pi0.cols(),
            couplings.len()
        ),
    ));

    if let Err(e) = check_finite(a, s0, pi0, couplings) {
        diagnostics.push(Diagnostic::fail("finite_entries", e));
        return TripleValidation { diagnostics };
    }
    diagnostics.push(Diagnostic::pass(
        "finite_entries",
        "all entries finite".into(),
    ));

    let herm_bound = tol.hermitian_asymmetry * (1.0 + s0.frobenius_norm());
    let asymmetry = s0.asymmetry();
    if asymmetry > herm_bound {
        diagnostics.push(Diagnostic::fail(
            "state_hermitian",
            CoreError::NotHermitian {
                asymmetry,
                tolerance: herm_bound,
            },
        ));
    } else {
        diagnostics.push(Diagnostic::pass(
            "state_hermitian",
            format!("asymmetry {asymmetry:.3e} within {herm_bound:.3e}"),
        ));
    }

    let residual = identity_residual(a, pi0, s0);
    let bound = tol.identity_init_bound(pi0.frobenius_norm());
    if residual > bound {
        diagnostics.push(Diagnostic::fail(
            "identity_at_origin",
            CoreError::IdentityViolation {
                t: 0.0,
                residual,
                tolerance: bound,
            },
        ));
    } else {
        diagnostics.push(Diagnostic::pass(
            "identity_at_origin",
            format!("residual {residual:.3e} within {bound:.3e}"),
        ));
    }

    match check_couplings_distinct(couplings, tol) {
        Err(e) => diagnostics.push(Diagnostic::fail("couplings_distinct", e)),
        Ok(min_sep) => diagnostics.push(Diagnostic::pass(
            "couplings_distinct",
            if couplings.len() > 1 {
                format!("minimum separation {min_sep:.3e}")
            } else {
                "single coupling".into()
            },
        )),
    }

    match check_couplings_off_spectrum(a, couplings, tol) {
        Err(e) => diagnostics.push(Diagnostic::fail("couplings_off_spectrum", e)),
        Ok(min_dist) => diagnostics.push(Diagnostic::pass(
            "couplings_off_spectrum",
            format!("minimum distance to spectrum {min_dist:.3e}"),
        )),
    }

    TripleValidation { diagnostics }
}

/// `||A S - S A* - i Pi Pi*||_F`, the displacement identity residual.
pub fn identity_residual(a: &ComplexMatrix, pi: &ComplexMatrix, s: &ComplexMatrix) -> f64 {
    let lhs = &(a * s) - &(s * &a.adjoint());
    let rhs = (pi * &pi.adjoint()).scale(Complex64::new(0.0, 1.0));
    lhs.distance(&rhs)
}

fn check_shapes(
    a: &ComplexMatrix,
    s0: &ComplexMatrix,
    pi0: &ComplexMatrix,
    couplings: &[f64],
) -> Result<()> {
    a.ensure_square()?;
    s0.ensure_square()?;
    let n = a.rows();
    if s0.rows() != n {
        return Err(CoreError::DimensionMismatch {
            context: format!("S(0) is {}x{}, A is {}x{}", s0.rows(), s0.cols(), n, n),
        });
    }
    if pi0.rows() != n {
        return Err(CoreError::DimensionMismatch {
            context: format!("Pi(0) has {} rows, A is {}x{}", pi0.rows(), n, n),
        });
    }
    if n == 0 || pi0.cols() == 0 {
        return Err(CoreError::DimensionMismatch {
            context: "state dimension n and signal dimension m must both be positive".into(),
        });
    }
    if couplings.is_empty() {
        return Err(CoreError::DimensionMismatch {
            context: "at least one coupling constant is required".into(),
        });
    }
    Ok(())
}

fn check_finite(
    a: &ComplexMatrix,
    s0: &ComplexMatrix,
    pi0: &ComplexMatrix,
    couplings: &[f64],
) -> Result<()> {
    a.ensure_finite()?;
    s0.ensure_finite()?;
    pi0.ensure_finite()?;
    for (k, c) in couplings.iter().enumerate() {
        if !c.is_finite() {
            return Err(CoreError::Scenario {
                context: format!("coupling constant c[{k}] is not finite"),
            });
        }
    }
    Ok(())
}

fn check_couplings_distinct(couplings: &[f64], tol: &Tolerances) -> Result<f64> {
    let mut min_sep = f64::INFINITY;
    for i in 0..couplings.len() {
        for j in (i + 1)..couplings.len() {
            let sep = (couplings[i] - couplings[j]).abs();
            if sep <= tol.spectral_gap {
                return Err(CoreError::DuplicateCoupling {
                    i,
                    j,
                    a: couplings[i],
                    b: couplings[j],
                });
            }
            min_sep = min_sep.min(sep);
        }
    }
    Ok(min_sep)
}

fn check_couplings_off_spectrum(
    a: &ComplexMatrix,
    couplings: &[f64],
    tol: &Tolerances,
) -> Result<f64> {
    let eigs = crate::matrix::spectrum(a)?;
    let mut min_dist = f64::INFINITY;
    for (k, &c) in couplings.iter().enumerate() {
        let ck = Complex64::new(c, 0.0);
        let dist = eigs
            .iter()
            .map(|l| (l - ck).norm())
            .fold(f64::INFINITY, f64::min);
        if dist <= tol.spectral_gap {
            return Err(CoreError::CouplingOnSpectrum {
                k,
                value: c,
                distance: dist,
                threshold: tol.spectral_gap,
            });
        }
        min_dist = min_dist.min(dist);
    }
    Ok(min_dist)
}

/// Admitted dressing data with precomputed resolvents.
#[derive(Debug, Clone)]
pub struct GbdtTriple {
    a: ComplexMatrix,
    s0: ComplexMatrix,
    pi0: ComplexMatrix,
    couplings: Vec<f64>,
    resolvents: Vec<ComplexMatrix>,
    spectrum_a: Vec<Complex64>,
}

impl GbdtTriple {
    /// Validate and construct. S(0) is stored symmetrized, so downstream
    /// code can rely on exact Hermitian storage.
    pub fn new(
        a: ComplexMatrix,
        s0: ComplexMatrix,
        pi0: ComplexMatrix,
        couplings: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let validation = validate_triple(&a, &s0, &pi0, &couplings, tol);
        if !validation.is_valid() {
            return Err(validation
                .into_first_error()
                .expect("invalid validation carries an error"));
        }
        let resolvents = couplings
            .iter()
            .map(|&c| resolvent(&a, Complex64::new(c, 0.0)))
            .collect::<Result<Vec<_>>>()?;
        let spectrum_a = crate::matrix::spectrum(&a)?;
        Ok(GbdtTriple {
            s0: s0.hermitian_part(),
            a,
            pi0,
            couplings,
            resolvents,
            spectrum_a,
        })
    }

    pub fn a(&self) -> &ComplexMatrix {
        &self.a
    }

    pub fn s0(&self) -> &ComplexMatrix {
        &self.s0
    }

    pub fn pi0(&self) -> &ComplexMatrix {
        &self.pi0
    }

    pub fn couplings(&self) -> &[f64] {
        &self.couplings
    }

    pub fn spectrum_a(&self) -> &[Complex64] {
        &self.spectrum_a
    }

    /// `(A - c_k I)^{-1}`.
    pub fn resolvent(&self, k: usize) -> Result<&ComplexMatrix> {
        self.resolvents.get(k).ok_or(CoreError::AxisOutOfRange {
            k,
            r: self.couplings.len(),
        })
    }

    pub fn resolvents(&self) -> &[ComplexMatrix] {
        &self.resolvents
    }

    /// State dimension n.
    pub fn n(&self) -> usize {
        self.a.rows()
    }

    /// Signal dimension m.
    pub fn m(&self) -> usize {
        self.pi0.cols()
    }

    /// Number of space variables r.
    pub fn r(&self) -> usize {
        self.couplings.len()
    }

    /// Identity residual for evolved data `(Pi(t), S(t))`.
    pub fn identity_residual(&self, pi: &ComplexMatrix, s: &ComplexMatrix) -> f64 {
        identity_residual(&self.a, pi, s)
    }
}
