//! Core library: dressing-transform construction of explicit solutions for
//! first-order matrix dynamical systems, with built-in verification.

pub mod closed_form;
pub mod darboux;
pub mod error;
pub mod evolve;
pub mod family;
pub mod matrix;
pub mod tol;
pub mod triple;
pub mod verify;

pub use closed_form::{ProjectorClosedForm, SignatureClosedForm};
pub use darboux::{
    inverse_state_gram, psi_tilde, psi_tilde_space_derivative, quadratic_form, transfer,
    transform_hamiltonians, unitarity_defect, QuadraticForm, SolutionSample, TransferMatrix,
    TransformedHamiltonians,
};
pub use error::{CoreError, Result};
pub use evolve::{evolve, ode_rhs, EvolvedState, TimeGrid, Trajectory};
pub use family::HamiltonianFamily;
pub use matrix::{ComplexMatrix, HermitianCertificate};
pub use tol::Tolerances;
pub use triple::{validate_triple, GbdtTriple, TripleValidation};
pub use verify::{admission_report, run_suite, BoxDomain, CheckEntry, Verdict, VerificationReport};
