//! Time evolution of the dressing data.
//!
//! The coupled flow is
//! `Pi'(t) = -i sum_k R_k Pi(t) H_k(t)` and
//! `S'(t)  = -  sum_k R_k Pi(t) H_k(t) Pi(t)* R_k*`
//! with `R_k = (A - c_k I)^{-1}`. Its exact solutions keep S Hermitian and
//! propagate the displacement identity with zero drift, so the integrator
//! symmetrizes S after every step and treats a growing identity residual as
//! a hard failure rather than something to tolerate.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::family::HamiltonianFamily;
use crate::matrix::{condition_estimate, ComplexMatrix};
use crate::tol::Tolerances;
use crate::triple::GbdtTriple;

/// Uniform grid from 0 to `t_end` (either sign) with `steps` RK4 steps.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_end: f64,
    pub steps: usize,
}

impl Default for TimeGrid {
    fn default() -> Self {
        TimeGrid {
            t_end: 1.0,
            steps: 1000,
        }
    }
}

impl TimeGrid {
    pub fn new(t_end: f64, steps: usize) -> Result<Self> {
        let grid = TimeGrid { t_end, steps };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t_end.is_finite() || self.t_end == 0.0 {
            return Err(CoreError::InvalidTimeGrid {
                context: format!("t_end must be finite and nonzero, got {}", self.t_end),
            });
        }
        if self.steps == 0 {
            return Err(CoreError::InvalidTimeGrid {
                context: "at least one step is required".into(),
            });
        }
        Ok(())
    }

    /// Signed step size.
    pub fn step(&self) -> f64 {
        self.t_end / self.steps as f64
    }

    /// Grid time `i`, computed so the endpoint is exact.
    pub fn time(&self, i: usize) -> f64 {
        self.t_end * (i as f64 / self.steps as f64)
    }
}

/// Snapshot of the dressing data at one grid time.
#[derive(Debug, Clone)]
pub struct EvolvedState {
    pub t: f64,
    pub pi: ComplexMatrix,
    pub s: ComplexMatrix,
    /// Spectral condition estimate of S(t); the transform refuses states
    /// where this exceeds the configured limit.
    pub s_condition: f64,
    /// Displacement identity residual at this state.
    pub identity_residual: f64,
}

/// Evolved states in ascending time order.
#[derive(Debug, Clone)]
pub struct Trajectory {
    states: Vec<EvolvedState>,
    step: f64,
}

impl Trajectory {
    pub(crate) fn from_states(states: Vec<EvolvedState>, step: f64) -> Self {
        debug_assert!(!states.is_empty());
        debug_assert!(states.windows(2).all(|w| w[0].t < w[1].t));
        Trajectory { states, step }
    }

    pub fn states(&self) -> &[EvolvedState] {
        &self.states
    }

    /// Signed integration step.
    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn initial(&self) -> &EvolvedState {
        self.states.first().expect("trajectory is never empty")
    }

    pub fn last(&self) -> &EvolvedState {
        self.states.last().expect("trajectory is never empty")
    }

    pub fn nearest_index(&self, t: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, state) in self.states.iter().enumerate() {
            let d = (state.t - t).abs();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }

    /// Stored state closest in time to `t`.
    pub fn nearest(&self, t: f64) -> &EvolvedState {
        &self.states[self.nearest_index(t)]
    }
}

/// Right-hand side of the coupled flow at time `t`. S does not enter: both
/// derivatives depend on Pi alone.
pub fn ode_rhs(
    triple: &GbdtTriple,
    family: &HamiltonianFamily,
    t: f64,
    pi: &ComplexMatrix,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = triple.n();
    let m = triple.m();
    let mut dpi = ComplexMatrix::zeros(n, m);
    let mut ds = ComplexMatrix::zeros(n, n);
    for k in 0..triple.r() {
        let h = family.hamiltonian(k, t)?;
        let rk = &triple.resolvents()[k];
        let rpi = rk * pi;
        let rpih = &rpi * &h;
        dpi = &dpi + &rpih;
        ds = &ds + &(&rpih * &rpi.adjoint());
    }
    Ok((dpi.scale(Complex64::new(0.0, -1.0)), ds.scale_re(-1.0)))
}

/// Integrate the flow with classical fourth-order Runge-Kutta.
///
/// Every stored state is checked against the identity bound
/// `identity_scale * (1 + ||Pi(0)||_F^2)`; a violation aborts the run
/// because it means the computed data has left the solution manifold.
pub fn evolve(
    triple: &GbdtTriple,
    family: &HamiltonianFamily,
    grid: &TimeGrid,
    tol: &Tolerances,
) -> Result<Trajectory> {
    grid.validate()?;
    family.validate(triple.m(), triple.r(), tol)?;
    let h = grid.step();
    let bound = tol.identity_bound(triple.pi0().frobenius_norm());

    let mut pi = triple.pi0().clone();
    let mut s = triple.s0().clone();
    let mut states = Vec::with_capacity(grid.steps + 1);
    states.push(snapshot(triple, 0.0, pi.clone(), s.clone(), bound)?);

    for i in 0..grid.steps {
        let t = grid.time(i);
        let (k1p, k1s) = ode_rhs(triple, family, t, &pi)?;
        let (k2p, k2s) = ode_rhs(triple, family, t + 0.5 * h, &(&pi + &k1p.scale_re(0.5 * h)))?;
        let (k3p, k3s) = ode_rhs(triple, family, t + 0.5 * h, &(&pi + &k2p.scale_re(0.5 * h)))?;
        let (k4p, k4s) = ode_rhs(triple, family, t + h, &(&pi + &k3p.scale_re(h)))?;

        let wp = &(&k1p + &k4p) + &(&k2p + &k3p).scale_re(2.0);
        let ws = &(&k1s + &k4s) + &(&k2s + &k3s).scale_re(2.0);
        pi = &pi + &wp.scale_re(h / 6.0);
        s = (&s + &ws.scale_re(h / 6.0)).hermitian_part();

        states.push(snapshot(
            triple,
            grid.time(i + 1),
            pi.clone(),
            s.clone(),
            bound,
        )?);
    }

    if h < 0.0 {
        states.reverse();
    }
    Ok(Trajectory { states, step: h })
}

pub(crate) fn snapshot(
    triple: &GbdtTriple,
    t: f64,
    pi: ComplexMatrix,
    s: ComplexMatrix,
    bound: f64,
) -> Result<EvolvedState> {
    let identity_residual = triple.identity_residual(&pi, &s);
    if identity_residual > bound {
        return Err(CoreError::IdentityViolation {
            t,
            residual: identity_residual,
            tolerance: bound,
        });
    }
    let s_condition = condition_estimate(&s)?;
    Ok(EvolvedState {
        t,
        pi,
        s,
        s_condition,
        identity_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn scalar_triple(tol: &Tolerances) -> GbdtTriple {
        GbdtTriple::new(
            ComplexMatrix::scalar(c(0.0, 1.0)),
            ComplexMatrix::scalar(c(0.5, 0.0)),
            ComplexMatrix::scalar(c(1.0, 0.0)),
            vec![0.0],
            tol,
        )
        .unwrap()
    }

    fn unit_family() -> HamiltonianFamily {
        HamiltonianFamily::ConstantHermitian {
            matrices: vec![ComplexMatrix::identity(1)],
        }
    }

    #[test]
    fn rhs_matches_scalar_derivative() {
        // A = i, c = 0, H = 1: Pi' = -i(-i)Pi = -Pi, S' = -(-i)Pi Pi*(i) = -|Pi|^2.
        let tol = Tolerances::default();
        let triple = scalar_triple(&tol);
        let (dpi, ds) = ode_rhs(&triple, &unit_family(), 0.0, triple.pi0()).unwrap();
        assert!((dpi[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((ds[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scalar_flow_matches_exponential_decay() {
        let tol = Tolerances::default();
        let triple = scalar_triple(&tol);
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let traj = evolve(&triple, &unit_family(), &grid, &tol).unwrap();
        assert_eq!(traj.states().len(), 1001);

        let end = traj.last();
        assert!((end.t - 1.0).abs() < 1e-15);
        let pi_want = (-1.0f64).exp();
        let s_want = (-2.0f64).exp() / 2.0;
        assert!((end.pi[(0, 0)] - c(pi_want, 0.0)).norm() < 1e-11);
        assert!((end.s[(0, 0)] - c(s_want, 0.0)).norm() < 1e-11);

        for state in traj.states() {
            assert!(state.identity_residual < 1e-12);
            assert!((state.s_condition - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn midpoint_state_matches_closed_form() {
        let tol = Tolerances::default();
        let triple = scalar_triple(&tol);
        let grid = TimeGrid::new(1.0, 1000).unwrap();
        let traj = evolve(&triple, &unit_family(), &grid, &tol).unwrap();
        let mid = traj.nearest(0.5);
        assert!((mid.t - 0.5).abs() < 1e-12);
        assert!((mid.pi[(0, 0)] - c((-0.5f64).exp(), 0.0)).norm() < 1e-11);
    }

    #[test]
    fn backward_integration_reaches_negative_times() {
        let tol = Tolerances::default();
        let triple = scalar_triple(&tol);
        let grid = TimeGrid::new(-0.5, 500).unwrap();
        let traj = evolve(&triple, &unit_family(), &grid, &tol).unwrap();
        // States ascend from -0.5 to 0.
        assert!((traj.initial().t + 0.5).abs() < 1e-15);
        assert!((traj.last().t).abs() < 1e-15);
        let start = traj.initial();
        assert!((start.pi[(0, 0)] - c((0.5f64).exp(), 0.0)).norm() < 1e-11);
    }

    #[test]
    fn overtight_identity_bound_aborts() {
        let mut tol = Tolerances::default();
        let triple = scalar_triple(&tol);
        tol.identity_scale = 1e-30;
        let grid = TimeGrid::new(1.0, 100).unwrap();
        let err = evolve(&triple, &unit_family(), &grid, &tol);
        assert!(matches!(err, Err(CoreError::IdentityViolation { .. })));
    }

    #[test]
    fn degenerate_grids_rejected() {
        assert!(matches!(
            TimeGrid::new(1.0, 0),
            Err(CoreError::InvalidTimeGrid { .. })
        ));
        assert!(matches!(
            TimeGrid::new(0.0, 10),
            Err(CoreError::InvalidTimeGrid { .. })
        ));
        assert!(matches!(
            TimeGrid::new(f64::INFINITY, 10),
            Err(CoreError::InvalidTimeGrid { .. })
        ));
    }

    #[test]
    fn family_mismatch_rejected() {
        let tol = Tolerances::default();
        let triple = scalar_triple(&tol);
        let family = HamiltonianFamily::ConstantHermitian {
            matrices: vec![ComplexMatrix::identity(2)],
        };
        let grid = TimeGrid::new(1.0, 10).unwrap();
        assert!(evolve(&triple, &family, &grid, &tol).is_err());
    }
}
