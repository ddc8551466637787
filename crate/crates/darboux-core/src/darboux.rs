//! The transform layer: transfer matrices, transformed coefficient families
//! and explicit solution samples built from an evolved state.
//!
//! For a state `(Pi, S)` at time t the transfer matrix is
//! `w(t, z) = I_m - i Pi* S^{-1} (A - z I)^{-1} Pi`.
//! At the coupling points `z = c_k` it is unitary, the transformed
//! coefficients are `H~_k = w(t, c_k) H_k w(t, c_k)*`, and
//! `psi(t, zeta) = Pi* S^{-1} exp(i sum_k zeta_k R_k)`
//! solves `d psi/dt = sum_k H~_k d psi/d zeta_k`.
//!
//! Every inverse application is an LU solve against the factored S; S is
//! only accepted while its condition estimate stays under the configured
//! limit, so results never silently pass through a numerically singular
//! state.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::evolve::EvolvedState;
use crate::family::HamiltonianFamily;
use crate::matrix::{expm, ComplexMatrix, LuFactors};
use crate::tol::Tolerances;
use crate::triple::GbdtTriple;

/// `w(t, z)`, an m x m matrix.
#[derive(Debug, Clone)]
pub struct TransferMatrix {
    pub t: f64,
    pub z: Complex64,
    pub matrix: ComplexMatrix,
}

/// Original and transformed coefficients at one time, with the transfer
/// matrices that connect them.
#[derive(Debug, Clone)]
pub struct TransformedHamiltonians {
    pub t: f64,
    pub original: Vec<ComplexMatrix>,
    pub transformed: Vec<ComplexMatrix>,
    pub transfers: Vec<TransferMatrix>,
}

/// One m x n sample of the explicit solution (or of one of its space
/// derivatives).
#[derive(Debug, Clone)]
pub struct SolutionSample {
    pub t: f64,
    pub zeta: Vec<f64>,
    pub psi: ComplexMatrix,
}

/// The sandwich `psi* H~_k psi` evaluated two independent ways.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub t: f64,
    pub zeta: Vec<f64>,
    pub axis: usize,
    /// Route through the assembled solution and transformed coefficient.
    pub direct: ComplexMatrix,
    /// Route through resolvent algebra, bypassing the transfer matrix.
    pub simplified: ComplexMatrix,
    /// `||direct - simplified||_F / (1 + ||direct||_F)`.
    pub residual: f64,
}

/// `||W W* - I||_F`.
pub fn unitarity_defect(w: &ComplexMatrix) -> f64 {
    let prod = w * &w.adjoint();
    prod.distance(&ComplexMatrix::identity(w.rows()))
}

fn check_state_condition(state: &EvolvedState, tol: &Tolerances) -> Result<()> {
    if !state.s_condition.is_finite() || state.s_condition >= tol.condition_limit {
        return Err(CoreError::SingularState {
            t: state.t,
            condition: state.s_condition,
            limit: tol.condition_limit,
        });
    }
    Ok(())
}

fn check_zeta(zeta: &[f64], r: usize) -> Result<()> {
    if zeta.len() != r {
        return Err(CoreError::DimensionMismatch {
            context: format!("{} space coordinates for {r} axes", zeta.len()),
        });
    }
    if let Some(bad) = zeta.iter().find(|z| !z.is_finite()) {
        return Err(CoreError::Scenario {
            context: format!("non-finite space coordinate {bad}"),
        });
    }
    Ok(())
}

/// `exp(i sum_k zeta_k R_k)`.
fn space_exponential(triple: &GbdtTriple, zeta: &[f64]) -> Result<ComplexMatrix> {
    let n = triple.n();
    let mut acc = ComplexMatrix::zeros(n, n);
    for (k, &z) in zeta.iter().enumerate() {
        acc = &acc + &triple.resolvents()[k].scale_re(z);
    }
    expm(&acc.scale(Complex64::new(0.0, 1.0)))
}

/// Transfer matrix at a spectral point `z`.
pub fn transfer(
    triple: &GbdtTriple,
    state: &EvolvedState,
    z: Complex64,
    tol: &Tolerances,
) -> Result<TransferMatrix> {
    check_state_condition(state, tol)?;
    let dist = triple
        .spectrum_a()
        .iter()
        .map(|l| (l - z).norm())
        .fold(f64::INFINITY, f64::min);
    if dist <= tol.spectral_gap {
        return Err(CoreError::SpectralGap {
            context: format!("transfer matrix evaluation point z = {z}"),
            distance: dist,
            threshold: tol.spectral_gap,
        });
    }

    let shifted = triple.a().add_scaled_identity(-z);
    let resolvent_pi = LuFactors::factor(&shifted)?.solve_matrix(&state.pi);
    let s_inv_part = LuFactors::factor(&state.s)?.solve_matrix(&resolvent_pi);
    let m = triple.m();
    let w = &ComplexMatrix::identity(m)
        - &(&state.pi.adjoint() * &s_inv_part).scale(Complex64::new(0.0, 1.0));
    Ok(TransferMatrix {
        t: state.t,
        z,
        matrix: w,
    })
}

/// Transformed coefficients `H~_k = w(t, c_k) H_k(t) w(t, c_k)*`.
///
/// The adjoint (not the inverse) appears on the right; the two coincide
/// exactly when w is unitary, and using the adjoint keeps
/// the transformed coefficients Hermitian under roundoff.
pub fn transform_hamiltonians(
    triple: &GbdtTriple,
    family: &HamiltonianFamily,
    state: &EvolvedState,
    tol: &Tolerances,
) -> Result<TransformedHamiltonians> {
    let r = triple.r();
    let mut original = Vec::with_capacity(r);
    let mut transformed = Vec::with_capacity(r);
    let mut transfers = Vec::with_capacity(r);
    for k in 0..r {
        let h = family.hamiltonian(k, state.t)?;
        let w = transfer(
            triple,
            state,
            Complex64::new(triple.couplings()[k], 0.0),
            tol,
        )?;
        let ht = &(&w.matrix * &h) * &w.matrix.adjoint();
        original.push(h);
        transformed.push(ht.hermitian_part());
        transfers.push(w);
    }
    Ok(TransformedHamiltonians {
        t: state.t,
        original,
        transformed,
        transfers,
    })
}

/// Explicit solution sample `psi(t, zeta) = Pi* S^{-1} exp(i sum zeta_k R_k)`.
pub fn psi_tilde(
    triple: &GbdtTriple,
    state: &EvolvedState,
    zeta: &[f64],
    tol: &Tolerances,
) -> Result<SolutionSample> {
    check_state_condition(state, tol)?;
    check_zeta(zeta, triple.r())?;
    let e = space_exponential(triple, zeta)?;
    let s_inv_pi = LuFactors::factor(&state.s)?.solve_matrix(&state.pi);
    // S is Hermitian, so (S^{-1} Pi)* = Pi* S^{-1}.
    let psi = &s_inv_pi.adjoint() * &e;
    Ok(SolutionSample {
        t: state.t,
        zeta: zeta.to_vec(),
        psi,
    })
}

/// Space derivative `d psi/d zeta_k = Pi* S^{-1} (i R_k) exp(i sum zeta R)`.
pub fn psi_tilde_space_derivative(
    triple: &GbdtTriple,
    state: &EvolvedState,
    zeta: &[f64],
    axis: usize,
    tol: &Tolerances,
) -> Result<SolutionSample> {
    check_state_condition(state, tol)?;
    check_zeta(zeta, triple.r())?;
    let rk = triple.resolvent(axis)?;
    let e = space_exponential(triple, zeta)?;
    let s_inv_pi = LuFactors::factor(&state.s)?.solve_matrix(&state.pi);
    let psi = &(&s_inv_pi.adjoint() * &rk.scale(Complex64::new(0.0, 1.0))) * &e;
    Ok(SolutionSample {
        t: state.t,
        zeta: zeta.to_vec(),
        psi,
    })
}

/// `Pi* S^{-1} Pi`, the m x m form whose time derivative balances the
/// difference between transformed and original coefficients.
pub fn inverse_state_gram(state: &EvolvedState, tol: &Tolerances) -> Result<ComplexMatrix> {
    check_state_condition(state, tol)?;
    let s_inv_pi = LuFactors::factor(&state.s)?.solve_matrix(&state.pi);
    Ok((&state.pi.adjoint() * &s_inv_pi).hermitian_part())
}

/// Evaluate `psi* H~_k psi` along two independent routes and compare.
///
/// The direct route assembles the sample and the transformed coefficient;
/// the simplified route substitutes the displacement identity and reduces
/// the sandwich to
/// `E* (A* - c_k I) S^{-1} R_k Pi H_k Pi* R_k* S^{-1} (A - c_k I) E`
/// with `E = exp(i sum zeta R)`. Both are kept and compared; a disagreement
/// is an error, not something to average over.
pub fn quadratic_form(
    triple: &GbdtTriple,
    family: &HamiltonianFamily,
    state: &EvolvedState,
    zeta: &[f64],
    axis: usize,
    tol: &Tolerances,
) -> Result<QuadraticForm> {
    check_state_condition(state, tol)?;
    check_zeta(zeta, triple.r())?;
    if axis >= triple.r() {
        return Err(CoreError::AxisOutOfRange {
            k: axis,
            r: triple.r(),
        });
    }

    // Direct route.
    let sample = psi_tilde(triple, state, zeta, tol)?;
    let h = family.hamiltonian(axis, state.t)?;
    let w = transfer(
        triple,
        state,
        Complex64::new(triple.couplings()[axis], 0.0),
        tol,
    )?;
    let h_tilde = (&(&w.matrix * &h) * &w.matrix.adjoint()).hermitian_part();
    let direct = &(&sample.psi.adjoint() * &h_tilde) * &sample.psi;

    // Simplified route.
    let ck = triple.couplings()[axis];
    let e = space_exponential(triple, zeta)?;
    let rk_pi = triple.resolvents()[axis].matmul(&state.pi);
    let s_inv = LuFactors::factor(&state.s)?;
    let shift_adj = triple
        .a()
        .adjoint()
        .add_scaled_identity(-Complex64::new(ck, 0.0));
    let g = &shift_adj * &s_inv.solve_matrix(&rk_pi);
    let core = &(&g * &h) * &g.adjoint();
    let simplified = &(&e.adjoint() * &core) * &e;

    let residual = direct.distance(&simplified) / (1.0 + direct.frobenius_norm());
    if residual > tol.quadratic_form {
        return Err(CoreError::QuadraticFormMismatch {
            residual,
            tolerance: tol.quadratic_form,
        });
    }
    Ok(QuadraticForm {
        t: state.t,
        zeta: zeta.to_vec(),
        axis,
        direct,
        simplified,
        residual,
    })
}
