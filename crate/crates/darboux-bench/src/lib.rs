//! Deterministic fixtures for the benchmarks.
//!
//! Instances are assembled the way the core test suites assemble theirs:
//! the initial state is chosen well conditioned first and the generator is
//! solved from the displacement identity, so timings measure the kernels
//! rather than ill conditioning.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use darboux_core::matrix::{solve, spectrum};
use darboux_core::{ComplexMatrix, GbdtTriple, HamiltonianFamily, Tolerances};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    })
}

/// Matrix whose spectrum sits strictly above the real axis, so the
/// displacement equation A X - X A* = Q has a unique solution.
pub fn lifted_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let base = random_matrix(rng, n, n);
    let shift = Complex64::new(0.0, base.one_norm() + 0.5);
    base.add_scaled_identity(shift)
}

/// Admissible triple with a state of modest condition number: S(0) is picked
/// first, then A = (H + i Pi Pi*/2) S(0)^{-1} satisfies the identity exactly.
pub fn seeded_triple(seed: u64, n: usize, m: usize, r: usize) -> GbdtTriple {
    let tol = Tolerances::default();
    let mut rng = rng(seed);
    let pi0 = random_matrix(&mut rng, n, m);
    let b = random_matrix(&mut rng, n, n).scale_re(0.4);
    let s0 = (&b * &b.adjoint())
        .hermitian_part()
        .add_scaled_identity(Complex64::new(0.5, 0.0));
    let x = &random_matrix(&mut rng, n, n).hermitian_part()
        + &(&pi0 * &pi0.adjoint()).scale(Complex64::new(0.0, 0.5));
    let s0_inverse = solve(&s0, &ComplexMatrix::identity(n)).expect("S(0) is definite");
    let a = &x * &s0_inverse;
    let eigs = spectrum(&a).expect("spectrum of the constructed A");
    let radius = eigs.iter().map(|l| l.norm()).fold(0.0f64, f64::max);
    let couplings = (0..r).map(|k| radius + 1.0 + k as f64 * 0.7).collect();
    GbdtTriple::new(a, s0, pi0, couplings, &tol).expect("constructed instance is admissible")
}

/// Smallest admissible instance: n = m = r = 1, coefficient identically 1.
pub fn scalar_triple() -> GbdtTriple {
    let tol = Tolerances::default();
    let a = ComplexMatrix::scalar(Complex64::new(0.0, 1.0));
    let s0 = ComplexMatrix::scalar(Complex64::new(0.5, 0.0));
    let pi0 = ComplexMatrix::scalar(Complex64::new(1.0, 0.0));
    GbdtTriple::new(a, s0, pi0, vec![0.0], &tol).expect("scalar triple is admissible")
}

pub fn scalar_family() -> HamiltonianFamily {
    HamiltonianFamily::ConstantSignature { m1: 1, m2: 0 }
}
