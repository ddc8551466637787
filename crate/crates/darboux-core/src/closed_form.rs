//! Closed-form dressing data for two special coefficient families.
//!
//! Both constructions derive S(0) from Sylvester solves instead of taking it
//! as input, which makes the displacement identity hold by construction:
//!
//! * signature family: every axis shares `H = diag(I_{m1}, -I_{m2})`, the
//!   initial signal splits as `Pi(0) = [theta1, theta2]`, and with
//!   `E(t) = exp(-it sum_k R_k)` the data is
//!   `Pi(t) = [E theta1, E^{-1} theta2]`,
//!   `S(t) = E C1 E* + E^{-1} C2 E^{-*}` where
//!   `A C_j - C_j A* = i theta_j theta_j*`;
//! * projector family: `H_k = beta_k* beta_k` for orthonormal rows of a
//!   square matrix `beta`, and with `E_k(t) = exp(-it R_k)` the data is
//!   `Pi(t) = [E_1 Pi(0) beta_1*, ..., E_m Pi(0) beta_m*] beta`,
//!   `S(t) = sum_k E_k C_k E_k*` where
//!   `A C_k - C_k A* = i Pi(0) beta_k* beta_k Pi(0)*`.
//!
//! Closed-form states are exact up to the matrix exponential, so they serve
//! as the reference the integrator is measured against.

use num_complex::Complex64;

use crate::error::{CoreError, Result};
use crate::evolve::{snapshot, EvolvedState, TimeGrid, Trajectory};
use crate::family::HamiltonianFamily;
use crate::matrix::{expm, solve_sylvester, ComplexMatrix};
use crate::tol::Tolerances;
use crate::triple::GbdtTriple;

/// Closed-form data for the constant-signature family.
#[derive(Debug, Clone)]
pub struct SignatureClosedForm {
    triple: GbdtTriple,
    family: HamiltonianFamily,
    theta1: ComplexMatrix,
    theta2: ComplexMatrix,
    c1: ComplexMatrix,
    c2: ComplexMatrix,
    resolvent_sum: ComplexMatrix,
    identity_bound: f64,
}

impl SignatureClosedForm {
    pub fn new(
        a: ComplexMatrix,
        theta1: ComplexMatrix,
        theta2: ComplexMatrix,
        couplings: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = a.rows();
        if theta1.rows() != n || theta2.rows() != n {
            return Err(CoreError::DimensionMismatch {
                context: format!(
                    "theta blocks have {} and {} rows, state dimension is {n}",
                    theta1.rows(),
                    theta2.rows()
                ),
            });
        }
        let c1 = displacement_solution(&a, &theta1, tol)?;
        let c2 = displacement_solution(&a, &theta2, tol)?;
        let s0 = &c1 + &c2;
        let pi0 = ComplexMatrix::hstack(&[&theta1, &theta2])?;
        let triple = GbdtTriple::new(a, s0, pi0, couplings, tol)?;
        let family = HamiltonianFamily::ConstantSignature {
            m1: theta1.cols(),
            m2: theta2.cols(),
        };
        family.validate(triple.m(), triple.r(), tol)?;
        let mut resolvent_sum = ComplexMatrix::zeros(n, n);
        for r in triple.resolvents() {
            resolvent_sum = &resolvent_sum + r;
        }
        Ok(SignatureClosedForm {
            identity_bound: tol.identity_bound(triple.pi0().frobenius_norm()),
            triple,
            family,
            theta1,
            theta2,
            c1,
            c2,
            resolvent_sum,
        })
    }

    pub fn triple(&self) -> &GbdtTriple {
        &self.triple
    }

    pub fn family(&self) -> &HamiltonianFamily {
        &self.family
    }

    /// Sylvester solution for the theta1 block; S(0) = C1 + C2.
    pub fn c1(&self) -> &ComplexMatrix {
        &self.c1
    }

    pub fn c2(&self) -> &ComplexMatrix {
        &self.c2
    }

    /// Exact state at time `t`.
    pub fn state(&self, t: f64) -> Result<EvolvedState> {
        let phase = self.resolvent_sum.scale(Complex64::new(0.0, -t));
        let e = expm(&phase)?;
        let e_inv = expm(&phase.scale_re(-1.0))?;
        let pi = ComplexMatrix::hstack(&[&(&e * &self.theta1), &(&e_inv * &self.theta2)])?;
        let s = &(&(&e * &self.c1) * &e.adjoint()) + &(&(&e_inv * &self.c2) * &e_inv.adjoint());
        snapshot(&self.triple, t, pi, s.hermitian_part(), self.identity_bound)
    }

    /// Exact states on a uniform grid, ascending in time.
    pub fn trajectory(&self, grid: &TimeGrid) -> Result<Trajectory> {
        closed_form_trajectory(grid, |t| self.state(t))
    }
}

/// Closed-form data for the orthogonal-projector family.
#[derive(Debug, Clone)]
pub struct ProjectorClosedForm {
    triple: GbdtTriple,
    family: HamiltonianFamily,
    beta: ComplexMatrix,
    blocks: Vec<ComplexMatrix>,
    identity_bound: f64,
}

impl ProjectorClosedForm {
    pub fn new(
        a: ComplexMatrix,
        pi0: ComplexMatrix,
        beta: ComplexMatrix,
        couplings: Vec<f64>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let m = pi0.cols();
        if couplings.len() != m || beta.rows() != m || beta.cols() != m {
            return Err(CoreError::DimensionMismatch {
                context: format!(
                    "projector construction needs square beta and one axis per \
                     signal component: m = {m}, beta is {}x{}, {} couplings",
                    beta.rows(),
                    beta.cols(),
                    couplings.len()
                ),
            });
        }
        let family = HamiltonianFamily::OrthoProjectors { beta: beta.clone() };
        family.validate(m, m, tol)?;

        // C_k from A C_k - C_k A* = i (Pi(0) beta_k*)(Pi(0) beta_k*)*.
        let mut blocks = Vec::with_capacity(m);
        let mut s0 = ComplexMatrix::zeros(a.rows(), a.rows());
        for k in 0..m {
            let col = ComplexMatrix::from_fn(m, 1, |j, _| beta[(k, j)].conj());
            let lambda0 = &pi0 * &col;
            let ck = displacement_solution(&a, &lambda0, tol)?;
            s0 = &s0 + &ck;
            blocks.push(ck);
        }
        let triple = GbdtTriple::new(a, s0, pi0, couplings, tol)?;
        Ok(ProjectorClosedForm {
            identity_bound: tol.identity_bound(triple.pi0().frobenius_norm()),
            triple,
            family,
            beta,
            blocks,
        })
    }

    pub fn triple(&self) -> &GbdtTriple {
        &self.triple
    }

    pub fn family(&self) -> &HamiltonianFamily {
        &self.family
    }

    /// Per-axis Sylvester solutions; S(0) is their sum.
    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    /// Exact state at time `t`.
    pub fn state(&self, t: f64) -> Result<EvolvedState> {
        let n = self.triple.n();
        let m = self.triple.m();
        let mut columns = Vec::with_capacity(m);
        let mut s = ComplexMatrix::zeros(n, n);
        for k in 0..m {
            let ek = expm(&self.triple.resolvents()[k].scale(Complex64::new(0.0, -t)))?;
            let col = ComplexMatrix::from_fn(m, 1, |j, _| self.beta[(k, j)].conj());
            let lambda = &ek * &(self.triple.pi0() * &col);
            columns.push(lambda);
            s = &s + &(&(&ek * &self.blocks[k]) * &ek.adjoint());
        }
        let refs: Vec<&ComplexMatrix> = columns.iter().collect();
        let pi = &ComplexMatrix::hstack(&refs)? * &self.beta;
        snapshot(&self.triple, t, pi, s.hermitian_part(), self.identity_bound)
    }

    /// Exact states on a uniform grid, ascending in time.
    pub fn trajectory(&self, grid: &TimeGrid) -> Result<Trajectory> {
        closed_form_trajectory(grid, |t| self.state(t))
    }
}

/// Solve `A C - C A* = i Theta Theta*`. A zero-width block yields C = 0
/// without touching the solver.
fn displacement_solution(
    a: &ComplexMatrix,
    theta: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<ComplexMatrix> {
    if theta.cols() == 0 {
        return Ok(ComplexMatrix::zeros(a.rows(), a.rows()));
    }
    let q = (theta * &theta.adjoint()).scale(Complex64::new(0.0, 1.0));
    solve_sylvester(a, &q, tol)
}

fn closed_form_trajectory(
    grid: &TimeGrid,
    state_at: impl Fn(f64) -> Result<EvolvedState>,
) -> Result<Trajectory> {
    grid.validate()?;
    let mut states = Vec::with_capacity(grid.steps + 1);
    for i in 0..=grid.steps {
        states.push(state_at(grid.time(i))?);
    }
    if grid.step() < 0.0 {
        states.reverse();
    }
    Ok(Trajectory::from_states(states, grid.step()))
}
