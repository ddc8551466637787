//! Numerical thresholds used across the toolkit.
//!
//! Every check in the verification suite and every precondition in the
//! kernels reads its threshold from a single [`Tolerances`] value, so reports
//! stay comparable across scenarios and every knob can be overridden from the
//! command line by name.

use crate::error::{CoreError, Result};

/// Central collection of numerical thresholds.
///
/// Residual bounds marked "scale" multiply a problem-size factor at the point
/// of use (for instance `identity_scale * (1 + ||Pi(0)||_F^2)`).
#[derive(Debug, Clone)]
pub struct Tolerances {
    /// Accepted Frobenius asymmetry `||M - M*||_F` for Hermitian inputs.
    pub hermitian_asymmetry: f64,
    /// Identity residual scale while evolving, times `1 + ||Pi(0)||_F^2`.
    pub identity_scale: f64,
    /// Identity residual scale for the data at t = 0, times `1 + ||Pi(0)||_F^2`.
    pub identity_init_scale: f64,
    /// Minimum admissible distance between coupling constants and eigenvalues
    /// of A, and between the spectra of A and A*.
    pub spectral_gap: f64,
    /// Displacement-equation residual scale, times `1 + ||Q||_F`.
    pub sylvester_scale: f64,
    /// Unitarity defect bound for the transfer matrix at the couplings.
    pub unitarity: f64,
    /// Eigenvalue agreement bound between transformed and initial Hamiltonians.
    pub spectrum_match: f64,
    /// Agreement bound between the two quadratic-form routes, relative to
    /// `1 + ||direct||_F`.
    pub quadratic_form: f64,
    /// Acceptance band for second-order convergence ratios.
    pub convergence_band: (f64, f64),
    /// Condition estimate of S(t) above which the state counts as singular.
    pub condition_limit: f64,
    /// Condition estimate of S(t) above which unitarity probes are skipped.
    pub unitarity_condition_limit: f64,
    /// Slack for positive-semidefiniteness tests (largest admissible
    /// eigenvalue of S'(t), smallest admissible eigenvalue of a PSD family).
    pub psd_slack: f64,
    /// Lowest admissible eigenvalue of a transformed Hamiltonian whose
    /// initial Hamiltonian is positive semidefinite.
    pub positivity_transfer: f64,
    /// Energy-balance residual bound, relative to `1 + |flux|`.
    pub energy: f64,
    /// Finite-difference residual cap for the dynamical-system check at the
    /// finer step, relative to `1 + ||rhs||_F`.
    pub pde_scale: f64,
    /// Finite-difference residual cap for the conserved-quantity check at the
    /// finer step, relative to `1 + ||rhs||_F`.
    pub conservation_scale: f64,
    /// Residuals below this floor at both difference steps count as exactly
    /// zero; the convergence ratio is then meaningless and is not enforced.
    pub degenerate_floor: f64,
    /// Slack allowed on `max eig S(t) <= max eig S(0)` for monotone decay.
    pub monotonicity_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            hermitian_asymmetry: 1e-10,
            identity_scale: 1e-8,
            identity_init_scale: 1e-10,
            spectral_gap: 1e-8,
            sylvester_scale: 1e-10,
            unitarity: 1e-10,
            spectrum_match: 1e-9,
            quadratic_form: 1e-10,
            convergence_band: (3.5, 4.5),
            condition_limit: 1e12,
            unitarity_condition_limit: 1e8,
            psd_slack: 1e-12,
            positivity_transfer: 1e-10,
            energy: 1e-3,
            pde_scale: 1e-2,
            conservation_scale: 1e-2,
            degenerate_floor: 1e-10,
            monotonicity_slack: 1e-10,
        }
    }
}

impl Tolerances {
    /// Set a tolerance by its command-line name (`--tol NAME=VALUE`).
    pub fn set(&mut self, name: &str, value: f64) -> Result<()> {
        if !value.is_finite() {
            return Err(CoreError::InvalidTolerance {
                name: name.to_string(),
                value,
            });
        }
        match name {
            "hermitian" => self.hermitian_asymmetry = value,
            "identity" => self.identity_scale = value,
            "identity_init" => self.identity_init_scale = value,
            "gap" => self.spectral_gap = value,
            "sylvester" => self.sylvester_scale = value,
            "unitarity" => self.unitarity = value,
            "spectrum" => self.spectrum_match = value,
            "quadratic_form" => self.quadratic_form = value,
            "band_lo" => self.convergence_band.0 = value,
            "band_hi" => self.convergence_band.1 = value,
            "condition_limit" => self.condition_limit = value,
            "unitarity_condition_limit" => self.unitarity_condition_limit = value,
            "psd" => self.psd_slack = value,
            "positivity" => self.positivity_transfer = value,
            "energy" => self.energy = value,
            "pde" => self.pde_scale = value,
            "conservation" => self.conservation_scale = value,
            "floor" => self.degenerate_floor = value,
            "monotonicity" => self.monotonicity_slack = value,
            _ => {
                return Err(CoreError::UnknownTolerance {
                    name: name.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Identity residual bound for evolving states, given `||Pi(0)||_F`.
    pub fn identity_bound(&self, pi0_norm: f64) -> f64 {
        self.identity_scale * (1.0 + pi0_norm * pi0_norm)
    }

    /// Identity residual bound for the t = 0 data, given `||Pi(0)||_F`.
    pub fn identity_init_bound(&self, pi0_norm: f64) -> f64 {
        self.identity_init_scale * (1.0 + pi0_norm * pi0_norm)
    }

    /// Displacement-equation residual bound, given `||Q||_F`.
    pub fn sylvester_bound(&self, q_norm: f64) -> f64 {
        self.sylvester_scale * (1.0 + q_norm)
    }
}
