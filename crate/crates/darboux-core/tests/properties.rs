//! Randomized algebraic properties of the matrix kernels.

mod common;

use num_complex::Complex64;
use proptest::prelude::*;

use darboux_core::matrix::{expm, hermitian_eigenvalues, solve, solve_sylvester, spectrum};
use darboux_core::{evolve, ComplexMatrix, TimeGrid, Tolerances};

fn matrix_strategy(max_dim: usize) -> impl Strategy<Value = ComplexMatrix> {
    (1..=max_dim).prop_flat_map(|n| {
        proptest::collection::vec(
            (-1.5f64..1.5, -1.5f64..1.5).prop_map(|(re, im)| Complex64::new(re, im)),
            n * n,
        )
        .prop_map(move |entries| ComplexMatrix::from_fn(n, n, |i, j| entries[i * n + j]))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn exponential_of_negation_is_inverse(m in matrix_strategy(4)) {
        let forward = expm(&m).unwrap();
        let backward = expm(&m.scale_re(-1.0)).unwrap();
        let product = &forward * &backward;
        let defect = product.distance(&ComplexMatrix::identity(m.rows()));
        prop_assert!(defect < 1e-12, "defect {defect}");
    }

    #[test]
    fn exponential_commutes_with_adjoint(m in matrix_strategy(4)) {
        let of_adjoint = expm(&m.adjoint()).unwrap();
        let adjoint_of = expm(&m).unwrap().adjoint();
        prop_assert!(of_adjoint.distance(&adjoint_of) < 1e-12);
    }

    #[test]
    fn hermitian_generator_gives_unitary_exponential(m in matrix_strategy(4)) {
        let h = m.hermitian_part();
        let u = expm(&h.scale(Complex64::new(0.0, 1.0))).unwrap();
        let defect = (&u * &u.adjoint()).distance(&ComplexMatrix::identity(h.rows()));
        prop_assert!(defect < 1e-12, "defect {defect}");
    }

    #[test]
    fn hermitian_eigenvalues_sum_to_trace(m in matrix_strategy(5)) {
        let h = m.hermitian_part();
        let eigs = hermitian_eigenvalues(&h).unwrap();
        let trace: f64 = (0..h.rows()).map(|i| h[(i, i)].re).sum();
        let sum: f64 = eigs.iter().sum();
        prop_assert!((trace - sum).abs() < 1e-10 * (1.0 + trace.abs()));
    }

    #[test]
    fn general_and_hermitian_eigensolvers_agree(m in matrix_strategy(4)) {
        let h = m.hermitian_part();
        let mut via_qr: Vec<f64> = spectrum(&h).unwrap().iter().map(|z| z.re).collect();
        via_qr.sort_by(f64::total_cmp);
        let via_jacobi = hermitian_eigenvalues(&h).unwrap();
        for (a, b) in via_qr.iter().zip(&via_jacobi) {
            prop_assert!((a - b).abs() < 1e-8 * (1.0 + b.abs()), "{a} vs {b}");
        }
    }

    #[test]
    fn linear_solve_leaves_small_residual(m in matrix_strategy(4), shift in 1.0f64..3.0) {
        // Diagonal reinforcement keeps the instance comfortably invertible.
        let a = m.add_scaled_identity(Complex64::new(shift * m.rows() as f64, 0.0));
        let b = ComplexMatrix::identity(a.rows());
        let x = solve(&a, &b).unwrap();
        let residual = (&a * &x).distance(&b);
        prop_assert!(residual < 1e-10 * (1.0 + a.frobenius_norm() * x.frobenius_norm()));
    }

    #[test]
    fn matrix_serde_round_trips(m in matrix_strategy(4)) {
        let json = serde_json::to_string(&m).unwrap();
        let back: ComplexMatrix = serde_json::from_str(&json).unwrap();
        prop_assert!(m.distance(&back) == 0.0);
    }
}

#[test]
fn lifted_instances_admit_unique_hermitian_solutions() {
    let tol = Tolerances::default();
    for seed in 0..100u64 {
        let mut rng = common::rng(seed);
        let n = 2 + (seed as usize % 5);
        let a = common::random_matrix(&mut rng, n, n);
        let shift = a.one_norm() + 0.5;
        let a = a.add_scaled_identity(Complex64::new(0.0, shift));
        let pi = common::random_matrix(&mut rng, n, 2);
        let q = (&pi * &pi.adjoint()).scale(Complex64::new(0.0, 1.0));
        let s = solve_sylvester(&a, &q, &tol).unwrap();
        assert!(
            s.asymmetry() < 1e-10 * (1.0 + s.frobenius_norm()),
            "seed {seed}"
        );
        let residual = (&(&a * &s) - &(&s * &a.adjoint())).distance(&q);
        assert!(
            residual < 1e-10 * (1.0 + q.frobenius_norm()),
            "seed {seed}: {residual}"
        );
    }
}

#[test]
fn resolvents_commute_pairwise() {
    let tol = Tolerances::default();
    for seed in 0..20u64 {
        let triple = common::seeded_triple(seed, 4, 2, 3, &tol);
        let rs = triple.resolvents();
        for i in 0..rs.len() {
            for j in (i + 1)..rs.len() {
                let forward = &rs[i] * &rs[j];
                let reverse = &rs[j] * &rs[i];
                assert!(
                    forward.distance(&reverse) < 1e-12 * (1.0 + forward.frobenius_norm()),
                    "seed {seed}, axes {i},{j}"
                );
            }
        }
    }
}

#[test]
fn identity_propagates_for_random_instances() {
    let tol = Tolerances::default();
    let family = darboux_core::HamiltonianFamily::ConstantSignature { m1: 1, m2: 1 };
    let grid = TimeGrid::new(0.3, 300).unwrap();
    for seed in 100..110u64 {
        let triple = common::seeded_triple(seed, 3, 2, 2, &tol);
        let trajectory = evolve(&triple, &family, &grid, &tol).unwrap();
        let bound = tol.identity_bound(triple.pi0().frobenius_norm());
        for state in trajectory.states() {
            assert!(
                state.identity_residual <= bound,
                "seed {seed} at t = {}",
                state.t
            );
        }
    }
}
